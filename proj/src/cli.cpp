#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "recnet/experiment.hpp"
#include "recnet/serialize.hpp"

namespace recnet {
namespace {

struct Options {
  ExperimentConfig exp;
  std::string mode = "standard";
  std::string zip = "strict";
  std::string init;
  std::string out;
  std::string save;
  std::string load;
  std::string input;
  std::string shape;
};

double parse_number(const std::string& text, const std::string& what) {
  double v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size() || !std::isfinite(v)) {
    throw DomainError(what + ": not a number: '" + text + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream ss(text);
  while (std::getline(ss, part, sep)) parts.push_back(part);
  return parts;
}

InitRange parse_init(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 2) throw DomainError("--init expects LO:HI, got '" + text + "'");
  return {parse_number(parts[0], "--init"), parse_number(parts[1], "--init")};
}

// Resolves the string flags into cfg; fills the init range only when given.
void resolve(Options& o) {
  o.exp.mode = o.mode == "paper" ? BackpropMode::PaperVerbatim : BackpropMode::Standard;
  o.exp.zip = o.zip == "truncate" ? ZipMode::Truncate : ZipMode::Strict;
  if (!o.init.empty()) o.exp.init = parse_init(o.init);
  if (!o.load.empty()) o.exp.load_path = o.load;
}

// Writes to `path`, or to `out` when path is empty.
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
  } else {
    write_text_file(path, text);
  }
}

void add_training_flags(CLI::App& cmd, Options& o, const ExperimentConfig& defaults) {
  o.exp = defaults;
  const InitRange init = defaults.init;
  cmd.add_option("--samples", o.exp.samples, "number of training samples")->capture_default_str();
  cmd.add_option("--seed", o.exp.seed, "RNG seed")->capture_default_str();
  cmd.add_option("--lr", o.exp.learning_rate, "learning rate")->capture_default_str();
  cmd.add_option("--mode", o.mode, "backprop mode")->check(CLI::IsMember({"paper", "standard"}))->capture_default_str();
  cmd.add_option("--zip", o.zip, "forward zip mode")->check(CLI::IsMember({"strict", "truncate"}))->capture_default_str();
  cmd.add_option("--init", o.init,
                 "uniform init range LO:HI (default " + format_double(init.lo) + ":" + format_double(init.hi) +
                     "; write --init=-1:1 for a negative bound)");
  cmd.add_option("--out", o.out, "metrics CSV path (stdout if omitted)");
  cmd.add_option("--save", o.save, "write the trained network here");
  cmd.add_option("--load", o.load, "start from this network instead of a fresh one");
  cmd.add_flag("--foldr-order", o.exp.foldr_order, "train the dataset back to front, as a plain right fold");
}

template <class Net>
void finish(const ExperimentResult<Net>& result, const Options& o, std::ostream& out) {
  std::ostringstream csv;
  write_csv(csv, result.rows, result.pearson);
  emit(o.out, csv.str(), out);
  if (!o.save.empty()) save_network_file(result.network, o.save);
}

void run_eval(const Options& o, std::ostream& out) {
  const ConvNetwork net = load_network_file<ConvNetwork>(o.load);
  Vector values;
  for (const auto& part : split(o.input, ',')) values.push_back(parse_number(part, "--input"));
  if (values.empty()) throw DomainError("--input needs at least one value");
  std::size_t w = values.size(), h = 1, d = 1;
  if (!o.shape.empty()) {
    const auto dims = split(o.shape, ':');
    if (dims.size() != 3) throw DomainError("--shape expects W:H:D");
    w = static_cast<std::size_t>(parse_number(dims[0], "--shape"));
    h = static_cast<std::size_t>(parse_number(dims[1], "--shape"));
    d = static_cast<std::size_t>(parse_number(dims[2], "--shape"));
  }
  TrainConfig tc;
  tc.zip = o.zip == "truncate" ? ZipMode::Truncate : ZipMode::Strict;
  const Tensor3 output = forward(net, Tensor3(w, h, d, std::move(values)), tc).front();
  std::ostringstream line;
  for (std::size_t k = 0; k < output.size(); ++k) line << (k ? "," : "") << format_double(output.values()[k]);
  line << '\n';
  emit(o.out, line.str(), out);
}

void run_gen_xo(const Options& o, std::ostream& out) {
  validate(o.exp);
  const auto data = xo_dataset(o.exp.samples, o.exp.seed, o.exp.noise);
  std::ostringstream csv;
  csv << "sample_index,label";
  for (int p = 0; p < 49; ++p) csv << ",p" << p;
  csv << '\n';
  for (std::size_t k = 0; k < data.size(); ++k) {
    csv << k << ',' << (data[k].desired[0] == 1.0 ? 'X' : 'O');
    for (double v : data[k].input.values()) csv << ',' << format_double(v);
    csv << '\n';
  }
  emit(o.out, csv.str(), out);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Train small networks built from folds and unfolds"};
  app.require_subcommand(1);

  Options sine, xo, eval, gen;
  auto* sine_cmd = app.add_subcommand("train-sine", "fit sin(x) on [0, 1) with the 1-3-3-3-1 network");
  add_training_flags(*sine_cmd, sine, sine_defaults());
  auto* xo_cmd = app.add_subcommand("train-xo", "classify noisy 7x7 X and O images with the conv network");
  add_training_flags(*xo_cmd, xo, xo_defaults());
  xo_cmd->add_option("--noise", xo.exp.noise, "pixel noise amplitude")->capture_default_str();

  auto* eval_cmd = app.add_subcommand("eval", "run a saved network forward on one input");
  eval_cmd->add_option("--load", eval.load, "network document")->required();
  eval_cmd->add_option("--input", eval.input, "comma-separated input values")->required();
  eval_cmd->add_option("--shape", eval.shape, "input tensor W:H:D (default N:1:1)");
  eval_cmd->add_option("--zip", eval.zip, "forward zip mode")->check(CLI::IsMember({"strict", "truncate"}));
  eval_cmd->add_option("--out", eval.out, "output path (stdout if omitted)");

  auto* gen_cmd = app.add_subcommand("gen-xo", "write an X/O dataset as CSV");
  gen.exp.samples = 600;
  gen_cmd->add_option("--samples", gen.exp.samples, "number of images")->capture_default_str();
  gen_cmd->add_option("--seed", gen.exp.seed, "RNG seed")->capture_default_str();
  gen_cmd->add_option("--noise", gen.exp.noise, "pixel noise amplitude")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "CSV path (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (sine_cmd->parsed()) {
      resolve(sine);
      finish(run_sine(sine.exp), sine, out);
    } else if (xo_cmd->parsed()) {
      resolve(xo);
      finish(run_xo(xo.exp), xo, out);
    } else if (eval_cmd->parsed()) {
      run_eval(eval, out);
    } else {
      run_gen_xo(gen, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace recnet
