#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "datm/corpus.hpp"
#include "datm/embedding_store.hpp"
#include "datm/sparse_dictionary.hpp"

namespace datm {

/// Parameters of the planted generator. Word vectors are sparse combinations
/// of planted atoms plus Gaussian noise; documents are emitted from one
/// planted atom each via softmax(<scale * atom, w>), mixed with a Zipf
/// unigram background.
struct SynthSpec {
  Eigen::Index k_true = 20;
  Eigen::Index dims = 30;
  std::size_t vocab = 2000;
  int t0_true = 3;
  double noise = 0.01;
  bool positive_coefficients = false;
  double coef_min = 0.5;
  double coef_max = 1.5;
  /// Weight of one shared direction added to every word vector.
  double global_weight = 0.0;
  /// When > 0, atom k leans along a hidden direction u by an amount rising
  /// linearly from -strength to +strength, and pole words +-u are added.
  double dimension_strength = 0.0;
  std::size_t pole_words = 4;
  std::size_t docs = 0;
  std::size_t doc_length = 60;
  double emission_scale = 8.0;
  double unigram_mix = 0.1;
  /// Group A chooses topic k with weight exp(group_bias * lean_k); group B uniformly.
  double group_bias = 0.0;
  std::uint64_t seed = 0;
};

struct SynthData {
  std::vector<std::string> words;
  Eigen::MatrixXd embedding;  // dims x V
  TermCounts counts;          // corpus occurrences + 1 for every word
  Eigen::MatrixXd atoms;      // dims x k_true, unit columns
  std::vector<SparseColumn> supports;  // planted code per word (empty for pole words)
  std::vector<Document> corpus;
  std::vector<Eigen::Index> doc_topics;
  std::vector<std::string> doc_groups;  // "A" or "B"
  std::vector<double> atom_lean;        // lean along the hidden direction per atom
  std::vector<std::string> positive_poles;
  std::vector<std::string> negative_poles;
};

/// Throws ConfigError for k_true < 2, dims < 2, k_true > vocab or t0_true
/// outside [1, k_true].
SynthData synthesize(const SynthSpec& spec);

}  // namespace datm
