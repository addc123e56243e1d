#include "datm/embedding_store.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "datm/artifact_io.hpp"
#include "datm/error.hpp"

namespace datm {

namespace fs = std::filesystem;

Vocabulary::Vocabulary(std::vector<std::string> words, std::vector<std::uint64_t> counts)
    : words_(std::move(words)), counts_(std::move(counts)) {
  if (words_.size() != counts_.size()) {
    throw DataError("vocabulary: " + std::to_string(words_.size()) + " words but " +
                    std::to_string(counts_.size()) + " counts");
  }
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (counts_[i] == 0) throw DataError("vocabulary: zero count for '" + words_[i] + "'");
    if (!index_.emplace(words_[i], i).second) {
      throw DataError("vocabulary: duplicate word '" + words_[i] + "'");
    }
    total_ += counts_[i];
  }
}

std::optional<std::size_t> Vocabulary::find(std::string_view term) const {
  auto it = index_.find(std::string(term));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

EmbeddingStore::EmbeddingStore(Vocabulary vocab, Eigen::MatrixXd matrix)
    : vocab_(std::move(vocab)), matrix_(std::move(matrix)) {
  if (static_cast<std::size_t>(matrix_.cols()) != vocab_.size()) {
    throw DataError("embedding: matrix has " + std::to_string(matrix_.cols()) +
                    " columns for " + std::to_string(vocab_.size()) + " words");
  }
  if (matrix_.rows() < 2) throw DataError("embedding: dimension must be at least 2");
  if (!matrix_.allFinite()) throw DataError("embedding: non-finite entry");
  norms_ = matrix_.colwise().norm().transpose();
}

TermCounts read_counts(const fs::path& path) {
  TermCounts counts;
  std::size_t lineno = 0;
  for (const auto& line : read_lines(path)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 2 || fields[0].empty()) {
      throw FormatError(path.string() + ": expected 'term<TAB>count'", lineno);
    }
    long long c = parse_integer(fields[1], lineno);
    if (c < 0) throw FormatError(path.string() + ": negative count", lineno);
    if (!counts.emplace(std::string(fields[0]), static_cast<std::uint64_t>(c)).second) {
      throw DataError(path.string() + ": duplicate term '" + std::string(fields[0]) + "'");
    }
  }
  return counts;
}

void write_counts(const fs::path& path, const TermCounts& counts) {
  std::vector<std::pair<std::string, std::uint64_t>> rows(counts.begin(), counts.end());
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::string out;
  for (const auto& [term, c] : rows) out += term + "\t" + std::to_string(c) + "\n";
  write_file_atomic(path, out);
}

EmbeddingStore load_embedding(const fs::path& embedding_path, const fs::path& counts_path,
                              std::uint64_t min_count) {
  return load_embedding(embedding_path, read_counts(counts_path), min_count);
}

EmbeddingStore load_embedding(const fs::path& embedding_path, const TermCounts& counts,
                              std::uint64_t min_count) {
  std::ifstream in(embedding_path);
  if (!in) throw DataError("cannot open " + embedding_path.string());
  const std::string where = embedding_path.string() + ": ";

  std::string line;
  if (!std::getline(in, line)) throw FormatError(where + "missing header", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_whitespace(line);
  if (header.size() != 2) throw FormatError(where + "header must be 'V N'", 1);
  const long long v_decl = parse_integer(header[0], 1);
  const long long n_decl = parse_integer(header[1], 1);
  if (v_decl < 0 || n_decl < 2) throw FormatError(where + "header must have V >= 0, N >= 2", 1);
  const auto dims = static_cast<std::size_t>(n_decl);

  const std::uint64_t floor = std::max<std::uint64_t>(min_count, 1);
  std::vector<std::string> words;
  std::vector<std::uint64_t> kept_counts;
  std::vector<double> values;
  TermCounts seen;
  std::size_t lineno = 1;
  long long rows = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    if (rows == v_decl) throw FormatError(where + "more rows than declared V", lineno);
    if (fields.size() != dims + 1) {
      throw FormatError(where + "expected " + std::to_string(dims) + " values for '" +
                            std::string(fields[0]) + "', found " +
                            std::to_string(fields.size() - 1),
                        lineno);
    }
    std::string term(fields[0]);
    if (!seen.emplace(term, 0).second) throw DataError(where + "duplicate word '" + term + "'");
    ++rows;
    auto it = counts.find(term);
    const bool keep = it != counts.end() && it->second >= floor;
    for (std::size_t j = 0; j < dims; ++j) {
      double x = parse_real(fields[j + 1], lineno);
      if (!std::isfinite(x)) throw DataError(where + "non-finite value for '" + term + "'");
      if (keep) values.push_back(x);
    }
    if (keep) {
      words.push_back(std::move(term));
      kept_counts.push_back(it->second);
    }
  }
  if (rows != v_decl) {
    throw FormatError(where + "header declares " + std::to_string(v_decl) + " rows, found " +
                          std::to_string(rows),
                      lineno);
  }
  Eigen::MatrixXd matrix = Eigen::Map<Eigen::MatrixXd>(
      values.data(), static_cast<Eigen::Index>(dims), static_cast<Eigen::Index>(words.size()));
  return EmbeddingStore(Vocabulary(std::move(words), std::move(kept_counts)), std::move(matrix));
}

std::string serialize_embedding(const std::vector<std::string>& words,
                                const Eigen::MatrixXd& matrix) {
  std::string out = std::to_string(matrix.cols()) + " " + std::to_string(matrix.rows()) + "\n";
  for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
    out += words.at(static_cast<std::size_t>(c));
    for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
      out += ' ';
      out += format_real(matrix(r, c));
    }
    out += '\n';
  }
  return out;
}

void write_embedding(const fs::path& path, const std::vector<std::string>& words,
                     const Eigen::MatrixXd& matrix) {
  write_file_atomic(path, serialize_embedding(words, matrix));
}

double word_probability(const EmbeddingStore& store, std::string_view term) {
  auto id = store.find(term);
  if (!id) throw DataError("out-of-vocabulary term '" + std::string(term) + "'");
  return store.probability(*id);
}

std::vector<Neighbor> nearest_words(const EmbeddingStore& store, const Eigen::VectorXd& query,
                                    std::size_t top) {
  if (query.size() != store.dimension()) throw ConfigError("query dimension mismatch");
  if (!query.allFinite()) throw NumericError("non-finite query vector");
  const double qn = query.norm();
  if (qn == 0.0) throw NumericError("zero-norm query vector");

  const Eigen::VectorXd dots = store.matrix().transpose() * query;
  std::vector<double> cosines(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    const double wn = store.norm(i);
    cosines[i] = wn > 0.0 ? dots[static_cast<Eigen::Index>(i)] / (qn * wn) : 0.0;
  }
  std::vector<std::size_t> order(store.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t n = std::min(top, order.size());
  auto by_cosine = [&](std::size_t a, std::size_t b) {
    return cosines[a] != cosines[b] ? cosines[a] > cosines[b] : a < b;
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                    by_cosine);
  std::vector<Neighbor> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({store.vocab().word(order[i]), cosines[order[i]]});
  }
  return out;
}

}  // namespace datm
