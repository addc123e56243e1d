#include "datm/semantic_dimensions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>
#include <nlohmann/json.hpp>

#include "datm/error.hpp"

namespace datm {

using Eigen::Index;
using Eigen::VectorXd;

namespace {

std::optional<VectorXd> mean_of(const EmbeddingStore& store, const std::vector<std::string>& terms,
                                std::vector<std::string>& unresolved) {
  VectorXd sum = VectorXd::Zero(store.dimension());
  std::size_t found = 0;
  for (const auto& t : terms) {
    if (auto id = store.find(t)) {
      sum += store.vector(*id);
      ++found;
    } else {
      unresolved.push_back(t);
    }
  }
  if (found == 0) return std::nullopt;
  return VectorXd(sum / static_cast<double>(found));
}

}  // namespace

SemanticDimension build_dimension(const EmbeddingStore& store, std::string name,
                                  const std::vector<std::string>& positive,
                                  const std::vector<std::string>& negative) {
  if (positive.empty() || negative.empty()) throw ConfigError("dimension needs terms on both poles");
  SemanticDimension d{std::move(name), positive, negative, {}, {}};
  auto pos = mean_of(store, positive, d.unresolved);
  auto neg = mean_of(store, negative, d.unresolved);
  if (!pos || !neg) {
    throw DataError("missing terms: no " + std::string(!pos ? "positive" : "negative") +
                    " term of dimension '" + d.name + "' is in the vocabulary");
  }
  d.vector = *pos - *neg;
  if (d.vector.squaredNorm() == 0.0) {
    throw DataError("dimension '" + d.name + "' is the zero vector (poles have identical means)");
  }
  return d;
}

SemanticDimension build_gender_dimension(const EmbeddingStore& store) {
  return build_dimension(store, "gender",
                         {"woman", "women", "female", "females", "she", "her", "herself", "hers"},
                         {"man", "men", "male", "males", "he", "him", "himself", "his"});
}

SemanticDimension load_dimension(const std::string& json_text, const EmbeddingStore& store) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
    return build_dimension(store, j.value("name", std::string("dimension")),
                           j.at("positive").get<std::vector<std::string>>(),
                           j.at("negative").get<std::vector<std::string>>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("dimension spec: ") + e.what());
  }
}

std::vector<double> project_topics(const SemanticDimension& dimension,
                                   const AtomDictionary& dictionary) {
  const double dn = dimension.vector.norm();
  if (dn == 0.0) throw DataError("zero dimension vector");
  if (dimension.vector.size() != dictionary.dimension()) throw DataError("dimension size mismatch");
  std::vector<double> out(static_cast<std::size_t>(dictionary.size()));
  for (Index k = 0; k < dictionary.size(); ++k) {
    out[static_cast<std::size_t>(k)] =
        dictionary.atom(k).dot(dimension.vector) / (dictionary.atom(k).norm() * dn);
  }
  return out;
}

std::vector<TopicRatio> prevalence_ratio(std::span<const TopicAssignment> assignments,
                                         const std::map<std::string, bool>& in_group_a,
                                         Index k) {
  std::vector<double> count_a(static_cast<std::size_t>(k), 0.0), count_b(static_cast<std::size_t>(k), 0.0);
  std::size_t n_a = 0, n_b = 0;
  for (const auto& a : assignments) {
    auto it = in_group_a.find(a.doc_id);
    if (it == in_group_a.end()) throw DataError("no group for document '" + a.doc_id + "'");
    auto& counts = it->second ? count_a : count_b;
    ++(it->second ? n_a : n_b);
    for (std::size_t j = 0; j < counts.size() && j < a.presence.size(); ++j) {
      if (a.presence[j]) counts[j] += 1.0;
    }
  }
  if (n_a == 0 || n_b == 0) throw ConfigError("prevalence ratio needs both groups to be non-empty");
  std::vector<TopicRatio> out(static_cast<std::size_t>(k));
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j].prevalence_a = count_a[j] / static_cast<double>(n_a);
    out[j].prevalence_b = count_b[j] / static_cast<double>(n_b);
    if (out[j].prevalence_b > 0.0) out[j].ratio = out[j].prevalence_a / out[j].prevalence_b;
  }
  return out;
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t m = i; m <= j; ++m) ranks[order[m]] = r;
    i = j + 1;
  }
  return ranks;
}

SpearmanResult spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ConfigError("spearman inputs differ in length");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::isfinite(x[i]) && std::isfinite(y[i])) {
      xs.push_back(x[i]);
      ys.push_back(y[i]);
    }
  }
  const std::size_t n = xs.size();
  if (n < 3) throw DataError("spearman needs at least 3 defined pairs, got " + std::to_string(n));
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  const double mean = (static_cast<double>(n) + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) throw DataError("spearman is undefined for constant input");
  SpearmanResult r;
  r.n = n;
  r.rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double df = static_cast<double>(n) - 2.0;
  if (std::abs(r.rho) >= 1.0) {
    r.p_value = 0.0;
  } else {
    const double t = r.rho * std::sqrt(df / (1.0 - r.rho * r.rho));
    boost::math::students_t dist(df);
    r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  }
  return r;
}

}  // namespace datm
