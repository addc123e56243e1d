#include "datm/synth.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "datm/error.hpp"
#include "datm/random.hpp"

namespace datm {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd gaussian_vector(Rng& rng, Index n) {
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) v[i] = standard_normal(rng);
  return v;
}

VectorXd random_unit(Rng& rng, Index n) {
  VectorXd v = gaussian_vector(rng, n);
  while (v.norm() == 0.0) v = gaussian_vector(rng, n);
  return v.normalized();
}

std::size_t sample_cumulative(Rng& rng, const std::vector<double>& cumulative) {
  const double u = uniform_unit(rng) * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

std::vector<double> cumulate(const VectorXd& weights) {
  std::vector<double> c(static_cast<std::size_t>(weights.size()));
  double acc = 0.0;
  for (Index i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    c[static_cast<std::size_t>(i)] = acc;
  }
  return c;
}

}  // namespace

SynthData synthesize(const SynthSpec& spec) {
  if (spec.k_true < 2) throw ConfigError("synth: k_true must be at least 2");
  if (spec.dims < 2) throw ConfigError("synth: dims must be at least 2");
  if (static_cast<std::size_t>(spec.k_true) > spec.vocab) {
    throw ConfigError("synth: infeasible spec, k_true exceeds vocab");
  }
  if (spec.t0_true < 1 || spec.t0_true > spec.k_true) throw ConfigError("synth: t0_true must lie in [1, k_true]");
  if (spec.noise < 0.0 || spec.coef_min <= 0.0 || spec.coef_max < spec.coef_min) {
    throw ConfigError("synth: invalid noise or coefficient range");
  }
  if (spec.unigram_mix < 0.0 || spec.unigram_mix > 1.0) throw ConfigError("synth: unigram_mix must lie in [0, 1]");

  Rng rng = make_stream(spec.seed, "synth");
  const Index n = spec.dims;
  const Index k = spec.k_true;
  SynthData out;

  // Planted atoms, optionally leaning along a hidden direction.
  const VectorXd hidden = random_unit(rng, n);
  out.atoms.resize(n, k);
  out.atom_lean.resize(static_cast<std::size_t>(k));
  for (Index j = 0; j < k; ++j) {
    VectorXd g = random_unit(rng, n);
    const double lean = spec.dimension_strength > 0.0
                            ? spec.dimension_strength * (-1.0 + 2.0 * static_cast<double>(j) / static_cast<double>(k - 1))
                            : -1.0 + 2.0 * static_cast<double>(j) / static_cast<double>(k - 1);
    out.atom_lean[static_cast<std::size_t>(j)] = lean;
    if (spec.dimension_strength > 0.0) {
      g -= g.dot(hidden) * hidden;
      g = g.normalized() + lean * hidden;
    }
    out.atoms.col(j) = g.normalized();
  }
  const VectorXd shared = random_unit(rng, n);

  const std::size_t poles = spec.dimension_strength > 0.0 ? spec.pole_words : 0;
  const std::size_t v = spec.vocab + 2 * poles;
  out.embedding.resize(n, static_cast<Index>(v));
  out.supports.resize(v);
  for (std::size_t w = 0; w < spec.vocab; ++w) {
    out.words.push_back(fmt::format("w{:05d}", w));
    auto support = sample_without_replacement(rng, static_cast<std::size_t>(k), static_cast<std::size_t>(spec.t0_true));
    VectorXd y = VectorXd::Zero(n);
    for (auto a : support) {
      double c = spec.coef_min + (spec.coef_max - spec.coef_min) * uniform_unit(rng);
      if (!spec.positive_coefficients && uniform_unit(rng) < 0.5) c = -c;
      out.supports[w].push_back({static_cast<Index>(a), c});
      y += c * out.atoms.col(static_cast<Index>(a));
    }
    if (spec.noise > 0.0) y += spec.noise * gaussian_vector(rng, n);
    y += spec.global_weight * shared;
    out.embedding.col(static_cast<Index>(w)) = y;
  }
  for (std::size_t p = 0; p < poles; ++p) {
    for (int sign : {+1, -1}) {
      const std::string name = fmt::format("{}{:02d}", sign > 0 ? "pole_pos" : "pole_neg", p);
      const std::size_t col = out.words.size();
      out.words.push_back(name);
      (sign > 0 ? out.positive_poles : out.negative_poles).push_back(name);
      VectorXd y = sign * hidden;
      if (spec.noise > 0.0) y += spec.noise * gaussian_vector(rng, n);
      out.embedding.col(static_cast<Index>(col)) = y + spec.global_weight * shared;
    }
  }

  // Corpus.
  std::vector<std::size_t> ranks = sample_without_replacement(rng, v, v);
  VectorXd unigram(static_cast<Index>(v));
  for (std::size_t r = 0; r < v; ++r) unigram[static_cast<Index>(ranks[r])] = 1.0 / static_cast<double>(r + 1);
  const auto unigram_cdf = cumulate(unigram);
  std::vector<std::vector<double>> topic_cdf;
  for (Index j = 0; j < k; ++j) {
    VectorXd logits = out.embedding.transpose() * (spec.emission_scale * out.atoms.col(j));
    logits.array() -= logits.maxCoeff();
    topic_cdf.push_back(cumulate(logits.array().exp().matrix()));
  }
  VectorXd group_a_weights(k);
  for (Index j = 0; j < k; ++j) group_a_weights[j] = std::exp(spec.group_bias * out.atom_lean[static_cast<std::size_t>(j)]);
  const auto group_a_cdf = cumulate(group_a_weights);

  std::vector<std::uint64_t> counts(v, 1);
  for (std::size_t d = 0; d < spec.docs; ++d) {
    const bool group_a = uniform_unit(rng) < 0.5;
    const Index topic = group_a ? static_cast<Index>(sample_cumulative(rng, group_a_cdf))
                                : static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(k)));
    Document doc{fmt::format("d{:05d}", d), {}};
    doc.tokens.reserve(spec.doc_length);
    for (std::size_t t = 0; t < spec.doc_length; ++t) {
      const bool background = uniform_unit(rng) < spec.unigram_mix;
      const std::size_t w = sample_cumulative(rng, background ? unigram_cdf : topic_cdf[static_cast<std::size_t>(topic)]);
      doc.tokens.push_back(out.words[w]);
      ++counts[w];
    }
    out.corpus.push_back(std::move(doc));
    out.doc_topics.push_back(topic);
    out.doc_groups.push_back(group_a ? "A" : "B");
  }
  for (std::size_t w = 0; w < v; ++w) out.counts[out.words[w]] = counts[w];
  return out;
}

}  // namespace datm
