#pragma once

// Brute-force reference computations for the test suites. Nothing here calls
// into the library's numeric code paths.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "datm/embedding_store.hpp"
#include "datm/random.hpp"

namespace oracle {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline double dot(const VectorXd& a, const VectorXd& b) {
  double s = 0.0;
  for (Index i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double cosine(const VectorXd& a, const VectorXd& b) {
  return dot(a, b) / std::sqrt(dot(a, a) * dot(b, b));
}

inline MatrixXd naive_product(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd c(a.rows(), b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (Index k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  }
  return c;
}

/// All (term index, cosine) pairs, sorted descending by cosine then index.
inline std::vector<std::pair<std::size_t, double>> cosine_ranking(const MatrixXd& words,
                                                                  const VectorXd& query) {
  std::vector<std::pair<std::size_t, double>> out;
  for (Index c = 0; c < words.cols(); ++c) out.push_back({static_cast<std::size_t>(c), cosine(words.col(c), query)});
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

/// Residual norm of the least-squares fit of `target` on `cols` of `dict`
/// via the 2x2 (or general) normal equations solved by Gaussian elimination.
inline double subset_residual(const MatrixXd& dict, const std::vector<Index>& cols, const VectorXd& target) {
  const std::size_t s = cols.size();
  std::vector<std::vector<double>> a(s, std::vector<double>(s + 1));
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = 0; j < s; ++j) a[i][j] = dot(dict.col(cols[i]), dict.col(cols[j]));
    a[i][s] = dot(dict.col(cols[i]), target);
  }
  for (std::size_t p = 0; p < s; ++p) {
    std::size_t piv = p;
    for (std::size_t r = p + 1; r < s; ++r) if (std::abs(a[r][p]) > std::abs(a[piv][p])) piv = r;
    std::swap(a[p], a[piv]);
    for (std::size_t r = 0; r < s; ++r) {
      if (r == p) continue;
      const double f = a[r][p] / a[p][p];
      for (std::size_t c = p; c <= s; ++c) a[r][c] -= f * a[p][c];
    }
  }
  VectorXd fit = VectorXd::Zero(target.size());
  for (std::size_t i = 0; i < s; ++i) fit += (a[i][s] / a[i][i]) * dict.col(cols[i]);
  VectorXd r = target - fit;
  return std::sqrt(dot(r, r));
}

/// Exhaustive best 2-subset by least-squares residual.
inline std::pair<Index, Index> best_pair(const MatrixXd& dict, const VectorXd& target) {
  std::pair<Index, Index> best{0, 1};
  double best_r = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < dict.cols(); ++i) {
    for (Index j = i + 1; j < dict.cols(); ++j) {
      const double r = subset_residual(dict, {i, j}, target);
      if (r < best_r) {
        best_r = r;
        best = {i, j};
      }
    }
  }
  return best;
}

inline double mutual_coherence(const MatrixXd& dict) {
  double m = 0.0;
  for (Index i = 0; i < dict.cols(); ++i)
    for (Index j = i + 1; j < dict.cols(); ++j) m = std::max(m, std::abs(cosine(dict.col(i), dict.col(j))));
  return m;
}

/// Maximum-weight perfect assignment (Hungarian, O(n^3)) on a square matrix;
/// returns the column matched to each row.
inline std::vector<Index> hungarian_max(const MatrixXd& weight) {
  const Index n = weight.rows();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<Index> p(n + 1, 0), way(n + 1, 0);
  for (Index i = 1; i <= n; ++i) {
    p[0] = i;
    Index j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const Index i0 = p[j0];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = -weight(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const Index j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<Index> match(n);
  for (Index j = 1; j <= n; ++j) match[p[j] - 1] = j - 1;
  return match;
}

/// Number of planted atoms matched (|cosine| >= threshold) under the optimal
/// one-to-one assignment between planted and fitted atoms.
inline std::size_t recovered_atoms(const MatrixXd& planted, const MatrixXd& fitted, double threshold) {
  MatrixXd w(planted.cols(), fitted.cols());
  for (Index i = 0; i < planted.cols(); ++i)
    for (Index j = 0; j < fitted.cols(); ++j) w(i, j) = std::abs(cosine(planted.col(i), fitted.col(j)));
  const auto match = hungarian_max(w);
  std::size_t hits = 0;
  for (Index i = 0; i < planted.cols(); ++i) hits += w(i, match[i]) >= threshold;
  return hits;
}

/// Rank table: rank_i = 1 + #{j : x_j < x_i} + (#{j : x_j == x_i} - 1) / 2.
inline std::vector<double> rank_table(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double less = 0, equal = 0;
    for (double v : x) {
      less += v < x[i];
      equal += v == x[i];
    }
    r[i] = 1.0 + less + (equal - 1.0) / 2.0;
  }
  return r;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i] / n;
    mb += b[i] / n;
  }
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

inline double spearman_rho(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(rank_table(x), rank_table(y));
}

inline MatrixXd random_matrix(datm::Rng& rng, Index rows, Index cols) {
  MatrixXd m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = datm::standard_normal(rng);
  return m;
}

inline MatrixXd random_unit_columns(datm::Rng& rng, Index rows, Index cols) {
  MatrixXd m = random_matrix(rng, rows, cols);
  for (Index j = 0; j < cols; ++j) m.col(j) /= std::sqrt(dot(m.col(j), m.col(j)));
  return m;
}

/// Builds a store with words w0..w{V-1}, the given vectors and counts.
inline datm::EmbeddingStore make_store(const MatrixXd& vectors, std::vector<std::uint64_t> counts = {}) {
  std::vector<std::string> words;
  for (Index c = 0; c < vectors.cols(); ++c) words.push_back("w" + std::to_string(c));
  if (counts.empty()) counts.assign(static_cast<std::size_t>(vectors.cols()), 1);
  return datm::EmbeddingStore(datm::Vocabulary(std::move(words), std::move(counts)), vectors);
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("datm_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace oracle
