#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "datm/corpus.hpp"
#include "datm/embedding_store.hpp"

namespace datm {

/// Smooth inverse frequency weights a / (p(w) + a).
struct SifWeights {
  double a = 0.001;

  double weight(double probability) const { return a / (probability + a); }
};

struct GlobalContext {
  Eigen::VectorXd c0;  // unit norm
  std::size_t sample_size = 0;
};

struct GistVector {
  Eigen::VectorXd vector;
  std::string doc_id;
  std::size_t start = 0;
  /// All-OOV window, or one lying (numerically) along c0.
  bool degenerate = false;
};

/// Sum of SIF-weighted vectors of the in-vocabulary terms, one contribution
/// per occurrence. OOV terms are skipped; an all-OOV window embeds to zero.
Eigen::VectorXd context_embed(std::span<const std::string> terms, const EmbeddingStore& store,
                              const SifWeights& weights);
Eigen::VectorXd context_embed(const ContextWindow& window, const EmbeddingStore& store,
                              const SifWeights& weights);

/// First singular direction of the stacked (uncentered unless `centered`)
/// window embeddings, unit length with its largest-magnitude entry positive.
/// Windows beyond `sample_cap` are subsampled uniformly with `seed`.
/// Throws DataError if fewer than two windows embed to a nonzero vector.
GlobalContext estimate_global_context(std::span<const ContextWindow> windows,
                                      const EmbeddingStore& store, const SifWeights& weights,
                                      std::size_t sample_cap, std::uint64_t seed,
                                      bool centered = false);

/// v - <v, c0> c0.
Eigen::VectorXd remove_global(const Eigen::VectorXd& v, const GlobalContext& global);

GistVector local_gist(const ContextWindow& window, const EmbeddingStore& store,
                      const SifWeights& weights, const GlobalContext& global);

/// softmax over <point, w> for every word, max-subtracted.
Eigen::VectorXd emission_distribution(const Eigen::VectorXd& point, const EmbeddingStore& store);

std::string serialize_global_context(const GlobalContext& global);
GlobalContext parse_global_context(std::string_view content, std::size_t sample_size);

}  // namespace datm
