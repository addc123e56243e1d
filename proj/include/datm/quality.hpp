#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "datm/embedding_store.hpp"
#include "datm/sparse_dictionary.hpp"
#include "datm/topic_model.hpp"

namespace datm {

struct QualityReport {
  Eigen::Index k = 0;
  int t0 = 0;
  std::uint64_t seed = 0;
  double coherence = 0.0;  // raw mean cosine, may be negative
  double diversity = 0.0;
  double coverage = 0.0;
  double sse = 0.0;
  double rmse = 0.0;

  /// Coherence as reported: clipped to [0, 1].
  double reported_coherence() const;
};

/// Mean pairwise cosine among each topic's first `top` terms, averaged over
/// topics (or over all pairs of all topics when `pooled`).
double coherence(std::span<const Topic> topics, const EmbeddingStore& store, std::size_t top,
                 bool pooled = false);

/// Unique terms across all top lists divided by K * top.
double diversity(std::span<const Topic> topics, std::size_t top);

/// 1 - SSE / SST with SST taken about the mean word vector.
double coverage(const EmbeddingStore& embedding, const AtomDictionary& dictionary,
                const SparseCode& code);

QualityReport evaluate(const EmbeddingStore& embedding, const AtomDictionary& dictionary,
                       const SparseCode& code, std::size_t top, bool pooled = false);

struct SweepRow {
  QualityReport report;
  FitReport fit;
  std::optional<std::string> error;
};

/// Fits one model per (k, seed) and scores it. Errors are recorded per row
/// and do not abort the sweep.
std::vector<SweepRow> sweep(const EmbeddingStore& embedding, std::span<const Eigen::Index> k_grid,
                            std::span<const std::uint64_t> seeds, const FitOptions& base,
                            std::size_t top, bool pooled = false);

/// Indices of rows at the knee of the coverage and RMSE curves (largest
/// distance from the chord joining the extreme K values). Only successful,
/// first-seed rows are considered.
std::vector<std::size_t> elbow_candidates(std::span<const SweepRow> rows);

/// Columns: k, t0, seed, coherence, diversity, coverage, sse, rmse (+ error).
std::string serialize_sweep(std::span<const SweepRow> rows,
                            std::span<const std::size_t> elbows = {});

}  // namespace datm
