#include "datm/gist.hpp"

#include <algorithm>
#include <cmath>

#include "datm/artifact_io.hpp"
#include "datm/error.hpp"
#include "datm/random.hpp"

namespace datm {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Relative size below which a gist is treated as empty.
constexpr double kDegenerateRatio = 1e-10;

}  // namespace

VectorXd context_embed(std::span<const std::string> terms, const EmbeddingStore& store,
                       const SifWeights& weights) {
  VectorXd v = VectorXd::Zero(store.dimension());
  for (const auto& t : terms) {
    if (auto id = store.find(t)) v += weights.weight(store.probability(*id)) * store.vector(*id);
  }
  return v;
}

VectorXd context_embed(const ContextWindow& window, const EmbeddingStore& store,
                       const SifWeights& weights) {
  return context_embed(std::span<const std::string>(window.terms), store, weights);
}

GlobalContext estimate_global_context(std::span<const ContextWindow> windows,
                                      const EmbeddingStore& store, const SifWeights& weights,
                                      std::size_t sample_cap, std::uint64_t seed, bool centered) {
  if (!(weights.a > 0.0)) throw ConfigError("SIF parameter a must be positive");
  if (sample_cap < 2) throw ConfigError("sample_cap must be at least 2");
  std::vector<std::size_t> picks;
  if (windows.size() > sample_cap) {
    Rng rng = make_stream(seed, "sampling");
    picks = sample_without_replacement(rng, windows.size(), sample_cap);
    std::sort(picks.begin(), picks.end());
  } else {
    picks.resize(windows.size());
    for (std::size_t i = 0; i < picks.size(); ++i) picks[i] = i;
  }

  std::vector<VectorXd> rows;
  rows.reserve(picks.size());
  for (std::size_t i : picks) {
    VectorXd v = context_embed(windows[i], store, weights);
    if (v.squaredNorm() > 0.0) rows.push_back(std::move(v));
  }
  if (rows.size() < 2) {
    throw DataError("insufficient data: need at least 2 windows with in-vocabulary terms, got " +
                    std::to_string(rows.size()));
  }
  const Index n = store.dimension();
  VectorXd mean = VectorXd::Zero(n);
  if (centered) {
    for (const auto& r : rows) mean += r;
    mean /= static_cast<double>(rows.size());
  }
  MatrixXd gram = MatrixXd::Zero(n, n);
  for (const auto& r : rows) {
    const VectorXd d = r - mean;
    gram.selfadjointView<Eigen::Lower>().rankUpdate(d);
  }
  gram = gram.selfadjointView<Eigen::Lower>();
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) throw NumericError("eigendecomposition failed for c0");
  VectorXd c0 = eig.eigenvectors().col(n - 1).normalized();
  Index arg = 0;
  c0.cwiseAbs().maxCoeff(&arg);
  if (c0[arg] < 0.0) c0 = -c0;
  return GlobalContext{std::move(c0), rows.size()};
}

VectorXd remove_global(const VectorXd& v, const GlobalContext& global) {
  VectorXd out = v - v.dot(global.c0) * global.c0;
  // Second pass clears the rounding left by the first.
  out -= out.dot(global.c0) * global.c0;
  return out;
}

GistVector local_gist(const ContextWindow& window, const EmbeddingStore& store,
                      const SifWeights& weights, const GlobalContext& global) {
  const VectorXd v = context_embed(window, store, weights);
  GistVector g{remove_global(v, global), window.doc_id, window.start, false};
  const double vn = v.norm();
  g.degenerate = vn == 0.0 || g.vector.norm() <= kDegenerateRatio * vn;
  return g;
}

VectorXd emission_distribution(const VectorXd& point, const EmbeddingStore& store) {
  if (point.size() != store.dimension()) throw ConfigError("point dimension mismatch");
  VectorXd logits = store.matrix().transpose() * point;
  const double peak = logits.maxCoeff();
  VectorXd p = (logits.array() - peak).exp().matrix();
  return p / p.sum();
}

std::string serialize_global_context(const GlobalContext& global) {
  std::string out;
  for (Index i = 0; i < global.c0.size(); ++i) {
    if (i) out += '\t';
    out += format_real(global.c0[i]);
  }
  return out + "\n";
}

GlobalContext parse_global_context(std::string_view content, std::size_t sample_size) {
  auto line = content.substr(0, content.find('\n'));
  auto fields = split(line, '\t');
  VectorXd c0(static_cast<Index>(fields.size()));
  for (std::size_t i = 0; i < fields.size(); ++i) c0[static_cast<Index>(i)] = parse_real(fields[i], 1);
  if (std::abs(c0.norm() - 1.0) > 1e-9) throw DataError("global context vector is not unit norm");
  return GlobalContext{std::move(c0), sample_size};
}

}  // namespace datm
