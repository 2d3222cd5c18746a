// One line per acceptance criterion: PASS or FAIL, the measured quantity, and
// the elapsed time. Exit status is the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <unistd.h>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "recnet/conv.hpp"
#include "recnet/dense.hpp"
#include "recnet/experiment.hpp"
#include "recnet/serialize.hpp"
#include "support/fd.hpp"
#include "support/gen.hpp"
#include "support/list_shape.hpp"
#include "support/params.hpp"
#include "support/tree_shape.hpp"

using namespace recnet;

namespace {

// Tolerances and budgets, as stated by the acceptance criteria.
constexpr double kFdStep = 1e-5;
constexpr double kFdRelErr = 1e-4;
constexpr double kSineMedianMax = -0.3;
constexpr double kXoMedianMax = -0.4;
constexpr double kPathSeconds = 10;
constexpr double kSplitSeconds = 5;
constexpr double kGradSeconds = 30;
constexpr double kSineSeconds = 60;
constexpr double kXoSeconds = 300;
constexpr std::uint64_t kExperimentSeeds[] = {1, 2, 3, 4, 5};

struct Outcome {
  bool ok;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("threw: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0 && s > budget_s) {
    o.ok = false;
    o.detail += "; over budget " + std::to_string(budget_s) + " s";
  }
  if (!o.ok) ++failures;
  std::printf("%s %2d %-28s %s (%.2f s)\n", o.ok ? "PASS" : "FAIL", id, name, o.detail.c_str(), s);
  std::fflush(stdout);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

using FixNet = Fix<FullyConnected>;

// 1 -------------------------------------------------------------------------
Outcome path_equivalence() {
  SplitMix64 rng(1001);
  int checked = 0, mismatched = 0;
  for (int trial = 0; trial < 100; ++trial) {
    for (BackpropMode mode : {BackpropMode::Standard, BackpropMode::PaperVerbatim}) {
      std::vector<std::size_t> widths(gen::size_in(rng, 3, 6));  // 2 to 5 dense layers
      for (auto& w : widths) w = gen::size_in(rng, 1, 4);
      SplitMix64 fork = rng;
      const DenseNetwork prog = gen::dense_net<DenseNetwork>(rng, widths, 0.0, 1.0);
      const FixNet fix = gen::dense_net<FixNet>(fork, widths, 0.0, 1.0);
      // Inputs stay in (0, 1) so the logit derivative is defined.
      const Sample<Vector> s{gen::vector(rng, widths.front(), 0.05, 0.95), gen::vector(rng, widths.back(), 0, 1)};
      TrainConfig cfg;
      cfg.mode = mode;
      cfg.learning_rate = rng.uniform(0.05, 1.0);

      const DenseNetwork by_fold = train_fold(s, prog, cfg);
      const bool same = train_meta(s, prog, cfg) == by_fold &&
                        to_program<FullyConnected, Unit>(train_meta(s, fix, cfg)) == by_fold &&
                        to_program<FullyConnected, Unit>(train_fold(s, fix, cfg)) == by_fold;
      ++checked;
      mismatched += !same;
    }
  }
  return {mismatched == 0, std::to_string(checked) + " (net, sample, mode) cases, " + std::to_string(mismatched) +
                               " mismatches"};
}

// 2 -------------------------------------------------------------------------
template <class K>
using L = listf::ListOf<int>::shape<K>;

Outcome banana_split() {
  SplitMix64 rng(1002);
  auto sum = [](const L<long>& s) -> long { return s.cell ? s.cell->first + s.cell->second : 0; };
  auto len = [](const L<long>& s) -> long { return s.cell ? 1 + s.cell->second : 0; };
  auto horner = [](const L<long>& s) -> long { return s.cell ? s.cell->first + 3 * s.cell->second : 0; };
  auto maxi = [](const L<long>& s) -> long { return s.cell ? std::max<long>(s.cell->first, s.cell->second) : -1000; };
  const auto p1 = pair_algebra<listf::ListOf<int>::shape>(sum, len);
  const auto p2 = pair_algebra<listf::ListOf<int>::shape>(horner, maxi);
  int bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto list = listf::from_vector(gen::ints(rng, 30));
    using P = std::pair<long, long>;
    bad += fold<P>(p1, list) != P{fold<long>(sum, list), fold<long>(len, list)};
    bad += fold<P>(p2, list) != P{fold<long>(horner, list), fold<long>(maxi, list)};
  }
  return {bad == 0, "1000 lists x 2 algebra pairs, " + std::to_string(bad) + " mismatches"};
}

// 3 -------------------------------------------------------------------------
double net_fd_error(const auto& net, const auto& sample, double lr) {
  TrainConfig cfg;
  cfg.learning_rate = lr;
  const auto& input = sample.input;
  const Vector& desired = sample.desired;
  using Net = std::decay_t<decltype(net)>;
  using V = std::decay_t<decltype(input)>;
  auto loss = [&](const Vector& p) {
    const V out = forward(params::set(net, p), input).front();
    return fd::half_sq(Vector(activation_traits<V>::flat(out).begin(), activation_traits<V>::flat(out).end()), desired);
  };
  const Vector before = params::get(net);
  const Vector step = scale(1.0 / lr, vec_sub(before, params::get(train_fold(sample, net, cfg))));
  return fd::relative_error(fd::gradient(loss, before, kFdStep), step);
}

Tensor3 rand_tensor(SplitMix64& rng, std::size_t w, std::size_t h, std::size_t d) {
  return Tensor3(w, h, d, gen::vector(rng, w * h * d));
}

FilterBank rand_bank(SplitMix64& rng, std::size_t fw, std::size_t fh, std::size_t d, std::size_t n) {
  return FilterBank(fw, fh, d, n, gen::vector(rng, fw * fh * d * n), gen::vector(rng, n));
}

// Layer-level check: dL/dinput of 1/2 |f(x) - t|^2 against a backward function.
double layer_fd_error(const std::function<Tensor3(const Tensor3&)>& f,
                      const std::function<Tensor3(const Tensor3&, const Tensor3&)>& back, const Tensor3& x,
                      const Vector& target) {
  auto loss = [&](const Vector& v) { return fd::half_sq(f(Tensor3(x.width(), x.height(), x.depth(), v)).values(), target); };
  const Tensor3 out = f(x);
  const Tensor3 g(out.width(), out.height(), out.depth(), vec_sub(out.values(), target));
  return fd::relative_error(fd::gradient(loss, x.values(), kFdStep), back(x, g).values());
}

Outcome gradient_soundness() {
  SplitMix64 rng(1003);
  constexpr int kInstances = 20;
  double worst[4] = {0, 0, 0, 0};  // dense, conv, pool, relu

  for (int k = 0; k < kInstances; ++k) {
    auto widths = gen::widths(rng, 3, 4);
    const auto net = gen::dense_net<DenseNetwork>(rng, widths);
    worst[0] = std::max(worst[0], net_fd_error(net, Sample<Vector>{gen::vector(rng, widths.front()),
                                                                  gen::vector(rng, widths.back(), 0, 1)},
                                               rng.uniform(0.1, 1)));
  }

  for (int k = 0; k < kInstances; ++k) {
    const std::size_t w = gen::size_in(rng, 2, 5), h = gen::size_in(rng, 2, 5), d = gen::size_in(rng, 1, 2);
    const Tensor3 x = rand_tensor(rng, w, h, d);

    // conv: input gradient, parameter gradient through a network, both.
    const FilterBank bank = rand_bank(rng, gen::size_in(rng, 1, w), gen::size_in(rng, 1, h), d, gen::size_in(rng, 1, 2));
    const std::size_t conv_out = conv_forward(bank, x).size();
    worst[1] = std::max(worst[1], layer_fd_error([&](const Tensor3& t) { return conv_forward(bank, t); },
                                                 [&](const Tensor3& t, const Tensor3& g) { return conv_backward(bank, t, g, 1).input_grad; },
                                                 x, gen::vector(rng, conv_out)));
    const ConvNetwork cnet = then(denselayer<ConvShape>(gen::matrix(rng, 2, conv_out), gen::vector(rng, 2)),
                                  then(convlayer<ConvShape>(bank), inputlayer<ConvShape>()));
    worst[1] = std::max(worst[1], net_fd_error(cnet, Sample<Tensor3>{x, gen::vector(rng, 2, 0, 1)}, 0.5));

    // pool: input gradient, then conv parameters beneath a pool layer.
    const std::size_t win = gen::size_in(rng, 1, std::min(w, h)), stride = gen::size_in(rng, 1, 2);
    const std::size_t pool_out = pool_forward(win, stride, x).first.size();
    worst[2] = std::max(worst[2], layer_fd_error([&](const Tensor3& t) { return pool_forward(win, stride, t).first; },
                                                 [&](const Tensor3& t, const Tensor3& g) {
                                                   return pool_backward(pool_forward(win, stride, t).second, g);
                                                 },
                                                 x, gen::vector(rng, pool_out)));
    const FilterBank unit = rand_bank(rng, 1, 1, d, 2);
    const std::size_t pooled = pool_forward(win, stride, conv_forward(unit, x)).first.size();
    const ConvNetwork pnet =
        then(denselayer<ConvShape>(gen::matrix(rng, 2, pooled), gen::vector(rng, 2)),
             then(poollayer<ConvShape>(win, stride), then(convlayer<ConvShape>(unit), inputlayer<ConvShape>())));
    worst[2] = std::max(worst[2], net_fd_error(pnet, Sample<Tensor3>{x, gen::vector(rng, 2, 0, 1)}, 0.5));

    // relu: input gradient, then conv parameters beneath a relu layer.
    worst[3] = std::max(worst[3], layer_fd_error(relu_forward, relu_backward, x, gen::vector(rng, x.size())));
    const ConvNetwork rnet =
        then(denselayer<ConvShape>(gen::matrix(rng, 2, w * h * 2), gen::vector(rng, 2)),
             then(relulayer<ConvShape>(), then(convlayer<ConvShape>(unit), inputlayer<ConvShape>())));
    worst[3] = std::max(worst[3], net_fd_error(rnet, Sample<Tensor3>{x, gen::vector(rng, 2, 0, 1)}, 0.5));
  }
  const bool ok = std::all_of(std::begin(worst), std::end(worst), [](double e) { return e < kFdRelErr; });
  return {ok, std::to_string(kInstances) + " instances each; worst rel err dense " + fmt(worst[0]) + ", conv " +
                  fmt(worst[1]) + ", pool " + fmt(worst[2]) + ", relu " + fmt(worst[3]) + " (limit " + fmt(kFdRelErr) + ")"};
}

// 4 -------------------------------------------------------------------------
Outcome zero_error_fixpoint() {
  SplitMix64 rng(1004);
  TrainConfig cfg;
  int cases = 0, moved = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto widths = gen::widths(rng, 4, 4);
    SplitMix64 fork = rng;
    const auto prog = gen::dense_net<DenseNetwork>(rng, widths);
    const auto fix = gen::dense_net<FixNet>(fork, widths);
    const Vector x = gen::vector(rng, widths.front());
    const Sample<Vector> s{x, forward(prog, x).front()};
    moved += !(train_fold(s, prog, cfg) == prog) + !(train_meta(s, prog, cfg) == prog) +
             !(train_meta(s, fix, cfg) == fix) + !(train_fold(s, fix, cfg) == fix);
    cases += 4;
  }
  for (int trial = 0; trial < 10; ++trial) {
    const ConvNetwork net = conv_network(rng, {-0.5, 0.5});
    const Tensor3 x = xo_dataset(1, rng).front().input;
    const Sample<Tensor3> s{x, forward(net, x).front().values()};
    moved += !(train_fold(s, net, cfg) == net) + !(train_meta(s, net, cfg) == net);
    cases += 2;
  }
  return {moved == 0, std::to_string(cases) + " trainings at zero error, " + std::to_string(moved) + " changed the network"};
}

// 5, 6 ----------------------------------------------------------------------
template <class Run>
Outcome experiment(Run run, ExperimentConfig cfg, double limit) {
  std::vector<double> rs;
  std::string detail = "r per seed:";
  for (std::uint64_t seed : kExperimentSeeds) {
    cfg.seed = seed;
    const auto r = run(cfg).pearson;
    rs.push_back(r ? *r : NAN);
    detail += " " + fmt(rs.back());
  }
  const bool any_nan = std::any_of(rs.begin(), rs.end(), [](double r) { return std::isnan(r); });
  const double med = any_nan ? NAN : median(rs);
  detail += "; median " + fmt(med) + " (need <= " + fmt(limit) + "; n=" + std::to_string(cfg.samples) +
            ", lr " + fmt(cfg.learning_rate) + ", init [" + fmt(cfg.init.lo) + ", " + fmt(cfg.init.hi) + "))";
  return {!any_nan && med <= limit, detail};
}

// 7 -------------------------------------------------------------------------
Outcome paper_smoke() {
  SplitMix64 rng(1007);
  TrainConfig cfg;
  cfg.mode = BackpropMode::PaperVerbatim;
  cfg.zip = ZipMode::Truncate;
  SplitMix64 fork = rng;
  const DenseNetwork prog = gen::dense_net<DenseNetwork>(rng, {2, 3, 3, 2}, 0.0, 1.0);
  const FixNet fix = gen::dense_net<FixNet>(fork, {2, 3, 3, 2}, 0.0, 1.0);
  const Sample<Vector> s{{0.3, 0.6}, {0.2, 0.9}};
  const DenseNetwork trained = train_fold(s, prog, cfg);
  const bool agree = to_program<FullyConnected, Unit>(train_fold(s, fix, cfg)) == trained;
  std::string dims;
  for (const auto* layer : dense_layers(trained)) {
    dims += " " + std::to_string(layer->weights.rows()) + "x" + std::to_string(layer->weights.cols());
  }
  return {agree, std::string("train_fold completed on Fix and Program") + (agree ? "" : " but they disagree") +
                     "; weight dims after update (outermost first):" + dims};
}

// 8 -------------------------------------------------------------------------
Outcome builder_compositionality() {
  SplitMix64 rng(1008);
  using Net = DenseNetwork;
  int bad = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t in = gen::size_in(rng, 1, 4), hidden = gen::size_in(rng, 1, 4), out = gen::size_in(rng, 1, 4);
    const Matrix w1 = gen::matrix(rng, hidden, in), w2 = gen::matrix(rng, out, hidden);
    const Vector b1 = gen::vector(rng, hidden), b2 = gen::vector(rng, out);

    // do { denselayer w2 b2; denselayer w1 b1; inputlayer }
    const Net monolithic = sequence(denselayer<FullyConnected>(w2, b2), [&](Unit) {
      return sequence(denselayer<FullyConnected>(w1, b1), [](Unit) { return inputlayer<FullyConnected>(); });
    });
    // do { network2; network1 }
    const Net network2 = denselayer<FullyConnected>(w2, b2);
    const Net network1 = then(denselayer<FullyConnected>(w1, b1), inputlayer<FullyConnected>());
    const Net sections = then(network2, network1);
    // Op (DenseLayer w2 b2 (Pure ())) >> Op (DenseLayer w1 b1 (Pure ())) >> Op InputLayer
    const Net op2 = Net::step(inject<Net::Node>(DenseLayer<Net>{w2, b2, Net::pure(Unit{})}));
    const Net op1 = Net::step(inject<Net::Node>(DenseLayer<Net>{w1, b1, Net::pure(Unit{})}));
    const Net op0 = Net::step(inject<Net::Node>(InputLayer<Net>{}));
    const Net primed = then(op2, then(op1, op0));
    // The same term written with no binds at all.
    const Net nested = Net::step(inject<Net::Node>(DenseLayer<Net>{
        w2, b2, Net::step(inject<Net::Node>(DenseLayer<Net>{w1, b1, op0}))}));
    const auto fix = to_fix(monolithic);

    bad += !(sections == monolithic) + !(primed == monolithic) + !(nested == monolithic) + !fix.has_value();
  }
  return {bad == 0, "50 random two-layer builds: sections == binds == explicit Op nesting; " +
                        std::to_string(bad) + " mismatches"};
}

// 9 -------------------------------------------------------------------------
template <class Net>
bool round_trips(const Net& net) {
  std::ostringstream os;
  save_network(net, os);
  std::istringstream is(os.str());
  return load_network<Net>(is) == net;
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "recnet");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

Outcome serialization() {
  SplitMix64 rng(1009);
  int bad = 0;
  for (int trial = 0; trial < 50; ++trial) bad += !round_trips(gen::dense_net<DenseNetwork>(rng, gen::widths(rng, 4, 4)));
  for (int trial = 0; trial < 50; ++trial) bad += !round_trips(conv_network(rng, {-1, 1}));
  bad += !round_trips(inputlayer<FullyConnected>());

  const auto dir = std::filesystem::temp_directory_path() / ("recnet_accept_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  auto path = [&](const char* name) { return (dir / name).string(); };
  int cli_bad = 0;
  for (const char* cmd : {"train-sine", "train-xo"}) {
    for (int run = 0; run < 2; ++run) {
      const std::string tag = std::string(cmd) + std::to_string(run);
      cli_bad += cli({cmd, "--samples", "40", "--seed", "7", "--out", path((tag + ".csv").c_str()), "--save",
                      path((tag + ".net").c_str())}) != 0;
    }
    for (const char* ext : {".csv", ".net"}) {
      const std::string a = read_text_file(path((std::string(cmd) + "0" + ext).c_str()));
      const std::string b = read_text_file(path((std::string(cmd) + "1" + ext).c_str()));
      cli_bad += a.empty() || a != b;
    }
  }
  // A saved network evaluated by the CLI matches the in-process forward pass.
  const auto sine_net = load_network_file<ConvNetwork>(path("train-sine0.net"));
  cli_bad += cli({"eval", "--load", path("train-sine0.net"), "--input", "0.375", "--out", path("eval.txt")}) != 0;
  const std::string expect = format_double(forward(sine_net, Tensor3(1, 1, 1, Vector{0.375})).front().values()[0]) + "\n";
  cli_bad += read_text_file(path("eval.txt")) != expect;
  std::filesystem::remove_all(dir);

  return {bad == 0 && cli_bad == 0, "101 networks (50 dense, 50 conv, bare input): " + std::to_string(bad) +
                                        " round-trip failures; CLI determinism/eval: " + std::to_string(cli_bad) +
                                        " failures"};
}

// 10 ------------------------------------------------------------------------
Outcome recursion_laws() {
  SplitMix64 rng(1010);
  int checks = 0, bad = 0;
  auto check = [&](bool ok) {
    ++checks;
    bad += !ok;
  };
  auto f = [](int x) { return 2 * x - 3; };
  auto g = [](int x) { return x * x; };
  auto id = [](int x) { return x; };
  using S = treef::Shape<int>;
  for (int trial = 0; trial < 500; ++trial) {
    const int a = gen::int_in(rng, -20, 20), b = gen::int_in(rng, -20, 20), c = gen::int_in(rng, -20, 20);
    // Functor laws on every shape.
    const S layers[] = {inject<S>(treef::Tip<int>{a}), inject<S>(treef::Tag<int>{a, b}), inject<S>(treef::Branch<int>{a, b, c})};
    for (const S& layer : layers) {
      check(fmap(id, layer) == layer);
      check(fmap([&](int x) { return g(f(x)); }, layer) == fmap(g, fmap(f, layer)));
    }
    const L<int> cell{std::pair{a, b}};
    check(fmap(id, cell) == cell);
    check(fmap([&](int x) { return g(f(x)); }, cell) == fmap(g, fmap(f, cell)));
    const Matrix w = gen::matrix(rng, 2, 2);
    const DenseLayer<int> dl{w, {a * 1.0, b * 1.0}, c};
    check(fmap(id, dl) == dl);
    check(fmap([&](int x) { return g(f(x)); }, dl) == fmap(g, fmap(f, dl)));
    const ConvLayer<int> cl{FilterBank(1, 1, 1, 1, {a * 1.0}, {b * 1.0}), c};
    check(fmap([&](int x) { return g(f(x)); }, cl) == fmap(g, fmap(f, cl)));

    // inject / project.
    const treef::Tag<int> tag{a, b};
    const S tagged = inject<S>(tag);
    const auto* back = project<treef::Tag<int>>(tagged);
    check(back != nullptr && *back == tag);
    check(project<treef::Branch<int>>(inject<S>(tag)) == nullptr);
    check((inject<S>(treef::Tag<int>{c, b}) == inject<S>(tag)) == (c == a));
    const ConvShape<int> wide = inject<ConvShape<int>>(dl);
    const auto* dense = project<DenseLayer<int>>(wide);
    check(dense != nullptr && *dense == dl);

    // fold / unfold against reference list functions.
    const std::vector<int> xs = gen::ints(rng, 25);
    const auto list = listf::from_vector(xs);
    check(listf::to_vector<int>(list) == xs);
    auto alt = [](const L<long>& s) -> long { return s.cell ? s.cell->first - 2 * s.cell->second : 0; };
    long ref = 0;
    for (auto it = xs.rbegin(); it != xs.rend(); ++it) ref = *it - 2 * ref;
    check(fold<long>(alt, list) == ref);
    const int start = gen::int_in(rng, 0, 20);
    auto countdown = [](int n) -> L<int> {
      if (n == 0) return {};
      return {std::pair{n, n - 1}};
    };
    std::vector<int> down(start);
    std::iota(down.rbegin(), down.rend(), 1);
    check(listf::to_vector<int>(unfold<listf::ListOf<int>::shape>(countdown, start)) == down);

    // Monad laws for sequence.
    auto k = [](int v) { return embed<treef::Prog>(treef::Tag<treef::Prog>{v, treef::Prog::pure(v + 1)}); };
    auto h = [](int v) {
      return v % 2 ? treef::Prog::pure(3 * v)
                   : embed<treef::Prog>(treef::Branch<treef::Prog>{v, treef::Prog::pure(v), treef::Prog::pure(-v)});
    };
    check(sequence(treef::Prog::pure(a), k) == k(a));
    const treef::Prog m = gen::program(rng, 5);
    check(sequence(sequence(m, k), h) == sequence(m, [&](int v) { return sequence(k(v), h); }));
    check(sequence(m, [](int v) { return treef::Prog::pure(v); }) == m);
  }
  return {bad == 0, std::to_string(checks) + " law checks, " + std::to_string(bad) + " violations"};
}

}  // namespace

int main() {
  criterion(1, "path-equivalence", kPathSeconds, path_equivalence);
  criterion(2, "banana-split", kSplitSeconds, banana_split);
  criterion(3, "gradient-soundness", kGradSeconds, gradient_soundness);
  criterion(4, "zero-error-fixpoint", 0, zero_error_fixpoint);
  criterion(5, "sine-experiment", kSineSeconds, [] { return experiment(run_sine, sine_defaults(), kSineMedianMax); });
  criterion(6, "xo-experiment", kXoSeconds, [] { return experiment(run_xo, xo_defaults(), kXoMedianMax); });
  criterion(7, "paper-verbatim-smoke", 0, paper_smoke);
  criterion(8, "builder-compositionality", 0, builder_compositionality);
  criterion(9, "serialization", 0, serialization);
  criterion(10, "recursion-laws", 0, recursion_laws);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures;
}
