#pragma once

// The two learning-curve experiments and the command-line front end.
//
// Each experiment seeds one SplitMix64, draws the network parameters from it
// (unless a network is loaded), then the dataset, then trains one sample at a
// time. A row records the L2 error of the network on a sample immediately
// before that sample's update; sample_index counts updates from 0.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "recnet/conv.hpp"
#include "recnet/dense.hpp"

namespace recnet {

struct ExperimentConfig {
  std::size_t samples = 1400;
  std::uint64_t seed = 0;
  double learning_rate = 0.1;
  BackpropMode mode = BackpropMode::Standard;
  ZipMode zip = ZipMode::Strict;
  InitRange init{0.0, 1.0};
  double noise = 0.1;        // X/O pixel noise amplitude
  bool foldr_order = false;  // train back to front, as a plain right fold does
  std::optional<std::string> load_path;
};

// Experiment defaults. The library's network initialiser draws from [0, 1);
// at learning rate 0.1 that range leaves the sine curve nearly flat and
// saturates the X/O network outright, so each experiment sets its own.
//   sine: 1400 samples, lr 0.1, init [0, 2)
//   xo:   600 samples,  lr 0.1, init [-0.5, 0.5)
ExperimentConfig sine_defaults();
ExperimentConfig xo_defaults();

// DomainError unless samples >= 1, lo < hi, learning_rate > 0 and noise >= 0.
void validate(const ExperimentConfig& cfg);

struct MetricsRow {
  std::size_t sample_index;
  double error;
  std::optional<double> running_corr;  // Pearson of (index, error) over rows so far
};

template <class Net>
struct ExperimentResult {
  std::vector<MetricsRow> rows;
  std::optional<double> pearson;  // absent when degenerate (fewer than two rows, flat errors)
  Net network;
};

ExperimentResult<DenseNetwork> run_sine(const ExperimentConfig& cfg);
ExperimentResult<ConvNetwork> run_xo(const ExperimentConfig& cfg);

// Header `sample_index,error`, one row per update, then `# pearson=<value>`
// (`nan` when absent). LF line endings, shortest round-trip numbers.
void write_csv(std::ostream& os, const std::vector<MetricsRow>& rows, std::optional<double> pearson);

// Subcommands train-sine, train-xo, eval, gen-xo. Data goes to files named
// by flags, or to `out` when none is given; diagnostics go to `err`.
// Returns the process exit status.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace recnet
