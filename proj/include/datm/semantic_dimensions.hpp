#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "datm/embedding_store.hpp"
#include "datm/sparse_dictionary.hpp"
#include "datm/topic_model.hpp"

namespace datm {

/// Direction mean(positive vectors) - mean(negative vectors).
struct SemanticDimension {
  std::string name;
  std::vector<std::string> positive_terms;
  std::vector<std::string> negative_terms;
  Eigen::VectorXd vector;
  /// Requested terms missing from the vocabulary (skipped).
  std::vector<std::string> unresolved;
};

/// Throws DataError if either pole has no resolvable term or the contrast is
/// the zero vector.
SemanticDimension build_dimension(const EmbeddingStore& store, std::string name,
                                  const std::vector<std::string>& positive,
                                  const std::vector<std::string>& negative);

/// The woman/man contrast lists.
SemanticDimension build_gender_dimension(const EmbeddingStore& store);

/// {"name": ..., "positive": [...], "negative": [...]}
SemanticDimension load_dimension(const std::string& json_text, const EmbeddingStore& store);

/// Cosine of every atom with the dimension; positive means the first pole.
std::vector<double> project_topics(const SemanticDimension& dimension,
                                   const AtomDictionary& dictionary);

struct TopicRatio {
  double prevalence_a = 0.0;
  double prevalence_b = 0.0;
  std::optional<double> ratio;  // none when prevalence_b == 0
};

/// Per-topic presence fraction in group A over that in group B.
/// `in_group_a` must cover every document; throws ConfigError if a group is empty.
std::vector<TopicRatio> prevalence_ratio(std::span<const TopicAssignment> assignments,
                                         const std::map<std::string, bool>& in_group_a,
                                         Eigen::Index k);

struct SpearmanResult {
  double rho = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

/// Average ranks (1-based) with ties sharing their mean rank.
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson correlation of average ranks; two-sided p from the t statistic
/// with n - 2 degrees of freedom. Pairs with a non-finite member are dropped.
/// Throws DataError for fewer than 3 pairs or a constant input.
SpearmanResult spearman(std::span<const double> x, std::span<const double> y);

}  // namespace datm
