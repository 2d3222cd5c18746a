#include "recnet/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "recnet/serialize.hpp"

namespace recnet {
namespace {

// Streaming Pearson over (k, e_k) pairs.
class RunningCorr {
 public:
  std::optional<double> add(double x, double y) {
    ++n_;
    sx_ += x, sy_ += y, sxx_ += x * x, syy_ += y * y, sxy_ += x * y;
    const double vx = n_ * sxx_ - sx_ * sx_, vy = n_ * syy_ - sy_ * sy_;
    if (n_ < 2 || !(vx > 0) || !(vy > 0)) return std::nullopt;
    return std::clamp((n_ * sxy_ - sx_ * sy_) / std::sqrt(vx * vy), -1.0, 1.0);
  }

 private:
  double n_ = 0, sx_ = 0, sy_ = 0, sxx_ = 0, syy_ = 0, sxy_ = 0;
};

template <class Net, class V>
ExperimentResult<Net> train_recorded(std::vector<Sample<V>> data, Net net, const ExperimentConfig& cfg) {
  TrainConfig tc;
  tc.learning_rate = cfg.learning_rate;
  tc.mode = cfg.mode;
  tc.zip = cfg.zip;
  tc.seed = cfg.seed;
  if (!cfg.foldr_order) std::reverse(data.begin(), data.end());

  const std::size_t n = data.size();
  std::vector<MetricsRow> rows(n);
  RunningCorr running;
  auto observe = [&](std::size_t i, const Net& current, const Sample<V>& s) {
    const std::size_t k = n - 1 - i;
    const V out = forward(current, s.input, tc).front();
    const double err = l2_norm(vec_sub(activation_traits<V>::flat(out), s.desired));
    rows[k] = {k, err, running.add(static_cast<double>(k), err)};
  };
  Net trained = train_many<Net, V>(data, std::move(net), tc, observe);

  std::vector<double> index(n), error(n);
  for (std::size_t k = 0; k < n; ++k) {
    index[k] = static_cast<double>(k);
    error[k] = rows[k].error;
  }
  std::optional<double> r;
  try {
    r = pearson_corr(index, error);
  } catch (const DegenerateInput&) {
  }
  return {std::move(rows), r, std::move(trained)};
}

}  // namespace

ExperimentConfig sine_defaults() {
  ExperimentConfig cfg;
  cfg.samples = 1400;
  cfg.learning_rate = 0.1;
  cfg.init = {0.0, 2.0};
  return cfg;
}

ExperimentConfig xo_defaults() {
  ExperimentConfig cfg;
  cfg.samples = 600;
  cfg.learning_rate = 0.1;
  cfg.init = {-0.5, 0.5};
  return cfg;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.samples < 1) throw DomainError("need at least one sample");
  if (!(cfg.init.lo < cfg.init.hi)) throw DomainError("init range needs lo < hi");
  if (!(cfg.learning_rate > 0)) throw DomainError("learning rate must be positive");
  if (!(cfg.noise >= 0)) throw DomainError("noise must be non-negative");
}

ExperimentResult<DenseNetwork> run_sine(const ExperimentConfig& cfg) {
  validate(cfg);
  SplitMix64 rng(cfg.seed);
  DenseNetwork net = cfg.load_path ? load_network_file<DenseNetwork>(*cfg.load_path) : fc_network(rng, cfg.init);
  std::vector<Sample<Vector>> data(cfg.samples);
  for (auto& s : data) {
    const double x = rng.uniform();
    s = {{x}, {std::sin(x)}};
  }
  return train_recorded(std::move(data), std::move(net), cfg);
}

ExperimentResult<ConvNetwork> run_xo(const ExperimentConfig& cfg) {
  validate(cfg);
  SplitMix64 rng(cfg.seed);
  ConvNetwork net = cfg.load_path ? load_network_file<ConvNetwork>(*cfg.load_path) : conv_network(rng, cfg.init);
  return train_recorded(xo_dataset(cfg.samples, rng, cfg.noise), std::move(net), cfg);
}

void write_csv(std::ostream& os, const std::vector<MetricsRow>& rows, std::optional<double> pearson) {
  os << "sample_index,error\n";
  for (const auto& row : rows) os << row.sample_index << ',' << format_double(row.error) << '\n';
  os << "# pearson=" << (pearson ? format_double(*pearson) : std::string("nan")) << '\n';
}

}  // namespace recnet
