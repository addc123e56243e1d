#include "datm/sparse_dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "datm/error.hpp"
#include "datm/random.hpp"

namespace datm {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

void fix_sign(VectorXd& left, VectorXd& right) {
  Index arg = 0;
  left.cwiseAbs().maxCoeff(&arg);
  if (left[arg] < 0.0) {
    left = -left;
    right = -right;
  }
}

template <typename Fn>
void parallel_for(Index n, unsigned threads, Fn&& fn) {
  if (threads <= 1 || n < 2 * static_cast<Index>(threads)) {
    for (Index i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const Index chunk = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const Index lo = t * chunk;
    const Index hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (Index i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

// Lawson-Hanson active set method for min ||a x - b|| subject to x >= 0.
VectorXd nonnegative_least_squares(const MatrixXd& a, const VectorXd& b) {
  const Index n = a.cols();
  VectorXd x = VectorXd::Zero(n);
  std::vector<char> passive(static_cast<std::size_t>(n), 0);
  const double tol = 1e-12 * std::max(1.0, a.norm() * b.norm());
  auto solve_passive = [&](VectorXd& s) {
    std::vector<Index> idx;
    for (Index j = 0; j < n; ++j) if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    s.setZero(n);
    if (idx.empty()) return;
    MatrixXd sub(a.rows(), static_cast<Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) sub.col(static_cast<Index>(i)) = a.col(idx[i]);
    const VectorXd z = sub.completeOrthogonalDecomposition().solve(b);
    for (std::size_t i = 0; i < idx.size(); ++i) s[idx[i]] = z[static_cast<Index>(i)];
  };
  for (int outer = 0; outer < 3 * static_cast<int>(n) + 3; ++outer) {
    const VectorXd w = a.transpose() * (b - a * x);
    Index best = -1;
    double best_w = tol;
    for (Index j = 0; j < n; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w[j] > best_w) {
        best_w = w[j];
        best = j;
      }
    }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = 1;
    VectorXd s;
    for (int inner = 0; inner <= n; ++inner) {
      solve_passive(s);
      double alpha = 1.0;
      bool feasible = true;
      for (Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && s[j] <= 0.0) {
          feasible = false;
          alpha = std::min(alpha, x[j] / (x[j] - s[j]));
        }
      }
      if (feasible) break;
      x += alpha * (s - x);
      for (Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && x[j] <= 0.0) {
          passive[static_cast<std::size_t>(j)] = 0;
          x[j] = 0.0;
        }
      }
    }
    x = s.cwiseMax(0.0);
  }
  return x;
}

// D_0: columns of Y in seeded random order, skipping zero columns and columns
// parallel to an atom already taken. Parallel duplicates are only used when
// there are not enough distinct directions.
MatrixXd initial_dictionary(const MatrixXd& data, Index k, std::uint64_t seed) {
  const Index v = data.cols();
  Rng rng = make_stream(seed, "init");
  const auto order = sample_without_replacement(rng, static_cast<std::size_t>(v),
                                                static_cast<std::size_t>(v));
  MatrixXd atoms(data.rows(), k);
  Index taken = 0;
  std::vector<Index> parallel_rejects;
  for (std::size_t pos = 0; pos < order.size() && taken < k; ++pos) {
    const Index c = static_cast<Index>(order[pos]);
    const double n = data.col(c).norm();
    if (n == 0.0) continue;
    VectorXd cand = data.col(c) / n;
    bool parallel = false;
    for (Index j = 0; j < taken && !parallel; ++j) {
      parallel = std::abs(atoms.col(j).dot(cand)) > 1.0 - 1e-9;
    }
    if (parallel) {
      parallel_rejects.push_back(c);
      continue;
    }
    atoms.col(taken++) = cand;
  }
  for (std::size_t i = 0; i < parallel_rejects.size() && taken < k; ++i) {
    atoms.col(taken++) = data.col(parallel_rejects[i]).normalized();
  }
  if (taken < k) {
    throw DataError("embedding has fewer than k=" + std::to_string(k) + " nonzero word vectors");
  }
  return atoms;
}

}  // namespace

AtomDictionary::AtomDictionary(MatrixXd atoms) : atoms_(std::move(atoms)) {
  if (atoms_.cols() < 2) throw DataError("dictionary needs at least 2 atoms");
  if (!atoms_.allFinite()) throw DataError("dictionary has non-finite entries");
  for (Index k = 0; k < atoms_.cols(); ++k) {
    if (std::abs(atoms_.col(k).norm() - 1.0) > 1e-9) {
      throw DataError("atom " + std::to_string(k) + " is not unit norm");
    }
  }
}

AtomDictionary AtomDictionary::from_unnormalized(MatrixXd atoms) {
  for (Index k = 0; k < atoms.cols(); ++k) {
    const double n = atoms.col(k).norm();
    if (n == 0.0) throw DataError("atom " + std::to_string(k) + " is zero");
    atoms.col(k) /= n;
  }
  return AtomDictionary(std::move(atoms));
}

std::size_t SparseCode::max_nonzeros() const {
  std::size_t m = 0;
  for (const auto& col : columns) m = std::max(m, col.size());
  return m;
}

OmpCoder::OmpCoder(const MatrixXd& atoms) : atoms_(atoms), gram_(atoms.transpose() * atoms) {}

OmpResult OmpCoder::encode(const VectorXd& target, int t0, double residual_tol,
                           bool nonnegative) const {
  return encode(target, atoms_.transpose() * target, t0, residual_tol, nonnegative);
}

OmpResult OmpCoder::encode(const VectorXd& target, const VectorXd& correlations, int t0,
                           double residual_tol, bool nonnegative) const {
  const Index k = atoms_.cols();
  if (t0 < 1 || t0 > k) throw ConfigError("t0 must lie in [1, K]");
  OmpResult result{{}, target};
  const double target_norm = target.norm();
  if (target_norm == 0.0) return result;

  std::vector<Index> selected;
  std::vector<char> used(static_cast<std::size_t>(k), 0);
  VectorXd corr = correlations;
  VectorXd coef;
  const double corr_floor = 1e-13 * target_norm;
  while (static_cast<int>(selected.size()) < t0) {
    if (result.residual.norm() <= residual_tol) break;
    Index best = -1;
    double best_abs = corr_floor;
    for (Index j = 0; j < k; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      const double a = nonnegative ? corr[j] : std::abs(corr[j]);
      if (a > best_abs) {
        best_abs = a;
        best = j;
      }
    }
    if (best < 0) break;
    selected.push_back(best);
    used[static_cast<std::size_t>(best)] = 1;

    MatrixXd span(atoms_.rows(), static_cast<Index>(selected.size()));
    for (std::size_t s = 0; s < selected.size(); ++s) span.col(static_cast<Index>(s)) = atoms_.col(selected[s]);
    coef = nonnegative ? nonnegative_least_squares(span, target)
                       : VectorXd(span.completeOrthogonalDecomposition().solve(target));
    result.residual = target - span * coef;
    corr = correlations;
    for (std::size_t s = 0; s < selected.size(); ++s) {
      corr.noalias() -= gram_.col(selected[s]) * coef[static_cast<Index>(s)];
    }
  }
  result.code.reserve(selected.size());
  for (std::size_t s = 0; s < selected.size(); ++s) {
    // Atoms pushed to zero by the nonnegativity constraint leave the support.
    if (nonnegative && coef[static_cast<Index>(s)] == 0.0) continue;
    result.code.push_back({selected[s], coef[static_cast<Index>(s)]});
  }
  return result;
}

OmpResult omp_encode(const AtomDictionary& dictionary, const VectorXd& target, int t0,
                     double residual_tol, bool nonnegative) {
  if (target.size() != dictionary.dimension()) throw ConfigError("target dimension mismatch");
  return OmpCoder(dictionary.atoms()).encode(target, t0, residual_tol, nonnegative);
}

RankOneApprox leading_singular_pair(const MatrixXd& matrix, const VectorXd& warm_start, double tol,
                                    int max_iter) {
  RankOneApprox out;
  VectorXd u = warm_start;
  VectorXd proj = matrix.transpose() * u;
  if (u.norm() == 0.0 || proj.norm() < 1e-12 * std::max(1.0, matrix.norm())) {
    Index arg = 0;
    matrix.colwise().squaredNorm().maxCoeff(&arg);
    u = matrix.col(arg);
  }
  const double start_norm = u.norm();
  if (start_norm == 0.0) {
    out.left = warm_start.norm() > 0.0 ? VectorXd(warm_start.normalized())
                                       : VectorXd(VectorXd::Unit(matrix.rows(), 0));
    out.scaled_right = VectorXd::Zero(matrix.cols());
    return out;
  }
  u /= start_norm;
  for (int it = 1; it <= max_iter; ++it) {
    proj.noalias() = matrix.transpose() * u;
    VectorXd next = matrix * proj;
    const double n = next.norm();
    out.iterations = it;
    if (n == 0.0) break;
    next /= n;
    const double delta = (next - u).norm();
    u = std::move(next);
    if (delta < tol) break;
  }
  out.scaled_right = matrix.transpose() * u;
  out.sigma = out.scaled_right.norm();
  fix_sign(u, out.scaled_right);
  out.left = std::move(u);
  return out;
}

FitResult fit(const EmbeddingStore& embedding, const FitOptions& options) {
  return fit(embedding.matrix(), options);
}

FitResult fit(const MatrixXd& data, const FitOptions& options) {
  const Index n = data.rows();
  const Index v = data.cols();
  const Index k = options.k;
  if (k < 2) throw ConfigError("k must be at least 2");
  if (k > v) {
    throw ConfigError("infeasible configuration: k=" + std::to_string(k) + " exceeds V=" +
                      std::to_string(v));
  }
  if (options.t0 < 1 || options.t0 > k) throw ConfigError("t0 must lie in [1, k]");
  if (options.max_iter < 1) throw ConfigError("max_iter must be at least 1");
  if (!data.allFinite()) throw DataError("embedding contains non-finite values");

  MatrixXd atoms = initial_dictionary(data, k, options.seed);
  SparseCode code{std::vector<SparseColumn>(static_cast<std::size_t>(v)), options.t0};
  MatrixXd residual(n, v);
  FitReport report;
  report.initial_sse = data.squaredNorm();
  VectorXd column_norms = data.colwise().norm().transpose();

  // Index of the worst-reconstructed nonzero column not yet taken this round.
  auto worst_column = [&](std::vector<char>& taken) -> Index {
    Index worst = -1;
    double worst_err = 0.0;
    for (Index c = 0; c < v; ++c) {
      if (taken[static_cast<std::size_t>(c)] || column_norms[c] == 0.0) continue;
      const double e = residual.col(c).squaredNorm();
      if (e > worst_err) {
        worst_err = e;
        worst = c;
      }
    }
    if (worst >= 0) taken[static_cast<std::size_t>(worst)] = 1;
    return worst;
  };

  for (int iter = 0; iter < options.max_iter; ++iter) {
    const std::size_t reinit_before = report.reinitialized_atoms;
    if (iter > 0 && options.max_atom_coherence < 1.0) {
      std::vector<char> taken(static_cast<std::size_t>(v), 0);
      const MatrixXd gram = atoms.transpose() * atoms;
      std::vector<char> replaced(static_cast<std::size_t>(k), 0);
      for (Index a = 1; a < k; ++a) {
        bool duplicate = false;
        for (Index j = 0; j < a && !duplicate; ++j) {
          duplicate = !replaced[static_cast<std::size_t>(j)] && std::abs(gram(a, j)) > options.max_atom_coherence;
        }
        if (!duplicate) continue;
        const Index c = worst_column(taken);
        if (c < 0) break;
        atoms.col(a) = data.col(c) / column_norms[c];
        replaced[static_cast<std::size_t>(a)] = 1;
        ++report.reinitialized_atoms;
      }
    }

    // Sparse coding against a frozen snapshot of the dictionary.
    {
      const OmpCoder coder(atoms);
      const MatrixXd correlations = atoms.transpose() * data;
      parallel_for(v, options.threads, [&](Index c) {
        OmpResult r = coder.encode(data.col(c), correlations.col(c), options.t0,
                                   options.omp_relative_tol * column_norms[c], options.nonnegative);
        code.columns[static_cast<std::size_t>(c)] = std::move(r.code);
        residual.col(c) = r.residual;
      });
    }

    // Usage lists: for every atom, (column, slot in that column's code).
    std::vector<std::vector<std::pair<Index, std::size_t>>> usage(static_cast<std::size_t>(k));
    for (Index c = 0; c < v; ++c) {
      const auto& col = code.columns[static_cast<std::size_t>(c)];
      for (std::size_t s = 0; s < col.size(); ++s) {
        usage[static_cast<std::size_t>(col[s].atom)].push_back({c, s});
      }
    }

    std::vector<char> replaced_from(static_cast<std::size_t>(v), 0);
    for (Index a = 0; a < k; ++a) {
      const auto& users = usage[static_cast<std::size_t>(a)];
      if (users.empty()) {
        if (const Index worst = worst_column(replaced_from); worst >= 0) {
          atoms.col(a) = data.col(worst) / column_norms[worst];
          ++report.reinitialized_atoms;
        }
        continue;
      }

      const Index m = static_cast<Index>(users.size());
      MatrixXd restricted(n, m);
      for (Index j = 0; j < m; ++j) {
        const auto [c, s] = users[static_cast<std::size_t>(j)];
        restricted.col(j) = residual.col(c) +
                            atoms.col(a) * code.columns[static_cast<std::size_t>(c)][s].coefficient;
      }
      RankOneApprox r1 = leading_singular_pair(restricted, atoms.col(a), options.power_tol,
                                               options.power_max_iter);
      if (options.nonnegative) {
        // Orient the atom toward its users, then project coefficients onto x >= 0.
        if (r1.scaled_right.sum() < 0.0) {
          r1.left = -r1.left;
          r1.scaled_right = -r1.scaled_right;
        }
        r1.scaled_right = r1.scaled_right.cwiseMax(0.0);
      }
      atoms.col(a) = r1.left;
      for (Index j = 0; j < m; ++j) {
        const auto [c, s] = users[static_cast<std::size_t>(j)];
        code.columns[static_cast<std::size_t>(c)][s].coefficient = r1.scaled_right[j];
        residual.col(c) = restricted.col(j) - r1.left * r1.scaled_right[j];
      }
    }
    if (options.nonnegative) {
      for (auto& col : code.columns) {
        col.erase(std::remove_if(col.begin(), col.end(), [](const CodeEntry& e) { return e.coefficient == 0.0; }),
                  col.end());
      }
    }

    const double sse = residual.squaredNorm();
    // Replacing an atom may raise the error; only undisturbed iterations count.
    if (!report.sse_per_iteration.empty() && report.reinitialized_atoms == reinit_before &&
        sse > report.sse_per_iteration.back() + 1e-6 * report.initial_sse) {
      ++report.monotonicity_violations;
    }
    report.sse_per_iteration.push_back(sse);
    report.iterations_run = iter + 1;
    if (!std::isfinite(sse)) throw NumericError("reconstruction error became non-finite");
    if (sse < options.sse_tolerance) break;
  }

  report.final_rmse = std::sqrt(report.sse_per_iteration.back() / (static_cast<double>(n) * static_cast<double>(v)));
  return FitResult{AtomDictionary(std::move(atoms)), std::move(code), std::move(report)};
}

MatrixXd reconstruct(const AtomDictionary& dictionary, const SparseCode& code) {
  MatrixXd out = MatrixXd::Zero(dictionary.dimension(), static_cast<Index>(code.columns.size()));
  for (std::size_t c = 0; c < code.columns.size(); ++c) {
    for (const auto& e : code.columns[c]) {
      if (e.atom < 0 || e.atom >= dictionary.size()) {
        throw DataError("corrupt model: code references atom " + std::to_string(e.atom) +
                        " of " + std::to_string(dictionary.size()));
      }
      out.col(static_cast<Index>(c)) += e.coefficient * dictionary.atom(e.atom);
    }
  }
  return out;
}

double reconstruction_sse(const MatrixXd& data, const AtomDictionary& dictionary,
                          const SparseCode& code) {
  if (data.cols() != static_cast<Index>(code.columns.size()) ||
      data.rows() != dictionary.dimension()) {
    throw DataError("code is inconsistent with the embedding matrix");
  }
  return (data - reconstruct(dictionary, code)).squaredNorm();
}

}  // namespace datm
