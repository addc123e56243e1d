#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace datm {

using TermCounts = std::unordered_map<std::string, std::uint64_t>;

/// Ordered set of unique terms with their corpus occurrence counts.
class Vocabulary {
 public:
  Vocabulary() = default;
  /// Throws DataError on duplicate terms, zero counts, or length mismatch.
  Vocabulary(std::vector<std::string> words, std::vector<std::uint64_t> counts);

  std::size_t size() const noexcept { return words_.size(); }
  const std::string& word(std::size_t id) const { return words_.at(id); }
  const std::vector<std::string>& words() const noexcept { return words_; }
  std::uint64_t count(std::size_t id) const { return counts_.at(id); }
  std::uint64_t total_tokens() const noexcept { return total_; }
  std::optional<std::size_t> find(std::string_view term) const;

 private:
  std::vector<std::string> words_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, std::size_t> index_;
  std::uint64_t total_ = 0;
};

/// Immutable N x V matrix of word vectors (one column per vocabulary term),
/// stored exactly as read.
class EmbeddingStore {
 public:
  EmbeddingStore(Vocabulary vocab, Eigen::MatrixXd matrix);

  const Vocabulary& vocab() const noexcept { return vocab_; }
  const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }
  Eigen::Index dimension() const noexcept { return matrix_.rows(); }
  std::size_t size() const noexcept { return vocab_.size(); }

  auto vector(std::size_t id) const { return matrix_.col(static_cast<Eigen::Index>(id)); }
  double norm(std::size_t id) const { return norms_[static_cast<Eigen::Index>(id)]; }
  std::optional<std::size_t> find(std::string_view term) const { return vocab_.find(term); }

  /// p(w) = count / total over retained terms.
  double probability(std::size_t id) const {
    return static_cast<double>(vocab_.count(id)) / static_cast<double>(vocab_.total_tokens());
  }

 private:
  Vocabulary vocab_;
  Eigen::MatrixXd matrix_;
  Eigen::VectorXd norms_;
};

struct Neighbor {
  std::string term;
  double cosine;
};

/// Reads a "term<TAB>count" file.
TermCounts read_counts(const std::filesystem::path& path);
/// Writes counts sorted by descending count, then term.
void write_counts(const std::filesystem::path& path, const TermCounts& counts);

/// Loads the "V N" text format, keeping terms whose count is at least
/// max(min_count, 1). Terms absent from the count file are dropped.
EmbeddingStore load_embedding(const std::filesystem::path& embedding_path,
                              const std::filesystem::path& counts_path,
                              std::uint64_t min_count);
EmbeddingStore load_embedding(const std::filesystem::path& embedding_path,
                              const TermCounts& counts, std::uint64_t min_count);

/// Writes the text format at 17 significant digits.
std::string serialize_embedding(const std::vector<std::string>& words,
                                const Eigen::MatrixXd& matrix);
void write_embedding(const std::filesystem::path& path, const std::vector<std::string>& words,
                     const Eigen::MatrixXd& matrix);

/// Throws DataError for out-of-vocabulary terms.
double word_probability(const EmbeddingStore& store, std::string_view term);

/// The `top` most cosine-similar terms, descending, ties by ascending column id.
/// Throws NumericError for a zero or non-finite query.
std::vector<Neighbor> nearest_words(const EmbeddingStore& store, const Eigen::VectorXd& query,
                                    std::size_t top);

}  // namespace datm
