#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "datm/embedding_store.hpp"

namespace datm {

/// N x K matrix whose columns ("atoms") have unit Euclidean norm.
class AtomDictionary {
 public:
  /// Throws DataError unless K >= 2, entries are finite and every column has
  /// norm 1 within 1e-9.
  explicit AtomDictionary(Eigen::MatrixXd atoms);

  /// Normalizes each column first; zero columns are rejected.
  static AtomDictionary from_unnormalized(Eigen::MatrixXd atoms);

  const Eigen::MatrixXd& atoms() const noexcept { return atoms_; }
  Eigen::Index size() const noexcept { return atoms_.cols(); }
  Eigen::Index dimension() const noexcept { return atoms_.rows(); }
  auto atom(Eigen::Index k) const { return atoms_.col(k); }

 private:
  Eigen::MatrixXd atoms_;
};

struct CodeEntry {
  Eigen::Index atom;
  double coefficient;

  bool operator==(const CodeEntry&) const = default;
};

/// Nonzero coefficients of one column, in the order the atoms were selected.
using SparseColumn = std::vector<CodeEntry>;

struct SparseCode {
  std::vector<SparseColumn> columns;
  int t0 = 1;

  std::size_t max_nonzeros() const;
};

struct OmpResult {
  SparseColumn code;
  Eigen::VectorXd residual;
};

/// Orthogonal matching pursuit against a fixed atom matrix. The Gram matrix is
/// computed once so that many targets can share it.
class OmpCoder {
 public:
  explicit OmpCoder(const Eigen::MatrixXd& atoms);

  /// `correlations` must equal atoms^T * target. With `nonnegative`, atoms are
  /// picked by largest positive correlation and coefficients solved under x >= 0.
  OmpResult encode(const Eigen::VectorXd& target, const Eigen::VectorXd& correlations, int t0,
                   double residual_tol, bool nonnegative = false) const;
  OmpResult encode(const Eigen::VectorXd& target, int t0, double residual_tol,
                   bool nonnegative = false) const;

 private:
  const Eigen::MatrixXd& atoms_;
  Eigen::MatrixXd gram_;
};

/// Greedily selects up to `t0` atoms by largest |<atom, residual>| (ties to
/// the lower index), re-solving least squares over the whole selected span
/// after each pick. Stops early once the residual norm is <= residual_tol.
OmpResult omp_encode(const AtomDictionary& dictionary, const Eigen::VectorXd& target, int t0,
                     double residual_tol = 0.0, bool nonnegative = false);

/// Leading singular pair of `matrix` by power iteration on matrix * matrix^T.
struct RankOneApprox {
  Eigen::VectorXd left;          // unit left singular vector, sign-normalized
  Eigen::VectorXd scaled_right;  // sigma * right singular vector = matrix^T * left
  double sigma = 0.0;
  int iterations = 0;
};

/// `warm_start` seeds the iteration (the current atom during K-SVD). The sign
/// is fixed so the largest-magnitude entry of `left` is positive.
RankOneApprox leading_singular_pair(const Eigen::MatrixXd& matrix,
                                    const Eigen::VectorXd& warm_start, double tol = 1e-10,
                                    int max_iter = 1000);

struct FitOptions {
  Eigen::Index k = 0;
  int t0 = 5;
  int max_iter = 10;
  std::uint64_t seed = 0;
  /// Absolute total squared error below which iteration stops.
  double sse_tolerance = 1e-6;
  /// OMP stops once ||residual|| <= omp_relative_tol * ||target||.
  double omp_relative_tol = 1e-9;
  /// Before each coding pass after the first, an atom whose |cosine| with an
  /// earlier atom exceeds this is replaced like an unused atom. Values >= 1
  /// disable the check.
  double max_atom_coherence = 0.95;
  /// Constrain coefficients to be nonnegative. Each atom is then oriented
  /// toward the columns that use it instead of by the largest-entry rule.
  bool nonnegative = false;
  double power_tol = 1e-10;
  int power_max_iter = 1000;
  unsigned threads = 1;
};

struct FitReport {
  int iterations_run = 0;
  std::vector<double> sse_per_iteration;
  double initial_sse = 0.0;  // ||Y||_F^2, the error of the empty code
  double final_rmse = 0.0;
  std::size_t reinitialized_atoms = 0;
  /// Iterations without atom replacement whose SSE rose by more than
  /// 1e-6 * initial_sse.
  std::size_t monotonicity_violations = 0;
};

struct FitResult {
  AtomDictionary dictionary;
  SparseCode code;
  FitReport report;
};

/// K-SVD: alternates OMP coding of every column of `data` with sequential
/// rank-one updates of each atom over the columns that use it.
FitResult fit(const Eigen::MatrixXd& data, const FitOptions& options);
FitResult fit(const EmbeddingStore& embedding, const FitOptions& options);

/// D * X. Throws DataError if a code references an atom outside the dictionary.
Eigen::MatrixXd reconstruct(const AtomDictionary& dictionary, const SparseCode& code);

/// ||data - D X||_F^2
double reconstruction_sse(const Eigen::MatrixXd& data, const AtomDictionary& dictionary,
                          const SparseCode& code);

}  // namespace datm
