#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace datm::cli {

/// Exit codes shared by every command.
enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kDataError = 3,
  kNumericError = 4,
};

/// Flat run configuration; every field can come from a flag or from a
/// key=value line in the --config file.
struct RunConfig {
  std::string corpus, embedding, counts, model, out = ".";
  std::string labels, dimension, groups, assignments, group_a;

  long long k = 0;
  int t0 = 5;
  int max_iter = 10;
  double a = 0.001;
  std::size_t window = 10;
  std::size_t stride = 1;
  std::uint64_t min_count = 15;
  std::size_t min_terms = 50;
  std::size_t top = 25;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double sse_tol = 1e-6;
  std::size_t sample_cap = 50000;
  double phrase_threshold = 10.0;
  std::uint64_t phrase_min_count = 5;
  int phrase_passes = 1;
  std::vector<long long> k_grid;
  std::vector<std::uint64_t> seeds;

  bool nonnegative = false;
  bool pooled_coherence = false;
  bool centered_c0 = false;
  std::string window_unit = "window";
  std::string count_mode = "every";
  bool standardize = false;

  // synth
  long long k_true = 20;
  long long dims = 30;
  std::size_t vocab = 2000;
  int t0_true = 3;
  double noise = 0.01;
  std::size_t docs = 0;
  std::size_t doc_length = 60;
  double emission_scale = 8.0;
  double unigram_mix = 0.1;
  double global_weight = 0.0;
  double dimension_strength = 0.0;
  double group_bias = 0.0;
  bool positive_coefficients = false;
};

/// Runs `datm <command> [flags]`; `args` excludes the program name.
int run(const std::vector<std::string>& args);

}  // namespace datm::cli
