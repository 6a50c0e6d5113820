#pragma once

#include "coca/types.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace coca {

/// A unit-norm sparse direction plus the solver trace that produced it.
/// Reported with its largest-magnitude entry positive.
struct SparseEigenResult {
  Vector vector;
  std::vector<std::size_t> support;  // indices of nonzero entries, ascending
  int iterations = 0;
  double objective = 0.0;            // v' Gamma v on the unshifted input
  bool converged = false;
  std::vector<double> objective_trace;  // per-iteration v' Gamma v
};

enum class InitKind { power_method, spca, user };

/// Options for the l_q truncated power method. With q = 0 the radius is the
/// support size k; with 0 < q <= 1 it is R_q in ||v||_q^q <= R_q.
struct SolverOptions {
  double q = 0.0;
  double radius = 10.0;
  int max_iters = 1000;
  double conv_tol = 1e-7;
  InitKind init = InitKind::spca;
  std::optional<Vector> init_vector;  // used when init == user
  double shift = 0.0;                 // added to the diagonal before iterating
  bool auto_shift = false;            // compute shift from lambda_min when set
  // Penalties of the SPCA run used for InitKind::spca.
  double init_spca_ridge = 1e-4;
  double init_spca_lasso = 0.0;
};

struct PmdOptions {
  int max_iters = 1000;
  double conv_tol = 1e-7;
  int threshold_steps = 60;
  std::optional<Vector> init_vector;  // defaults to power_init
};

struct SpcaOptions {
  int max_iters = 1000;
  double conv_tol = 1e-7;
  double cd_tol = 1e-8;
  int cd_max_sweeps = 10000;
  double shift = 0.0;
  std::optional<Vector> init_vector;  // defaults to power_init
};

struct PowerInitResult {
  Vector vector;
  int iterations = 0;
  bool converged = false;
};

/// Keeps entries whose index is in `keep`, zeroes the rest.
[[nodiscard]] Vector truncate(const Vector& v, std::span<const std::size_t> keep);

/// Indices of the k largest |v_i|, ties broken toward the lower index.
[[nodiscard]] std::vector<std::size_t> top_k_indices(const Vector& v, std::size_t k);

/// ||v||_q^q (for q = 0, the number of nonzeros).
[[nodiscard]] double lq_norm_pow(const Vector& v, double q);

/// For x violating ||x/||x||_2||_q^q <= R_q, the largest k such that the
/// normalized top-k truncation satisfies the constraint. Binary search over
/// k; valid because the normalized l_q norm of the top-k truncation is
/// nondecreasing in k. Throws InvalidRadius when even k = 1 fails.
[[nodiscard]] std::size_t find_truncation_level(const Vector& x, double q, double radius);

/// Shift that makes gamma + shift*I positive semidefinite:
/// max(0, -lambda_min) * (1 + 1e-3).
[[nodiscard]] double psd_shift(const Matrix& gamma);

/// Leading eigenvector by plain power iteration from the normalized all-ones
/// vector. A second, deterministically perturbed start is run as well; when
/// the two disagree the spectrum has no unique dominant direction and the
/// result is flagged unconverged.
[[nodiscard]] PowerInitResult power_init(const Matrix& gamma, double tol = 1e-8, int max_iters = 1000);

/// l_q constrained truncated power method. q = 0 is TPower.
[[nodiscard]] SparseEigenResult qtpm(const Matrix& gamma, const SolverOptions& opts);

/// Rank-one penalized matrix decomposition with ||v||_1 <= delta, ||v||_2 <= 1.
[[nodiscard]] SparseEigenResult pmd_rank_one(const Matrix& gamma, double delta,
                                             const PmdOptions& opts = {});

/// Regression-form sparse PCA with ridge penalty delta1 and lasso penalty
/// delta2. Throws AllZeroSolution when the lasso step shrinks w to zero.
[[nodiscard]] SparseEigenResult spca_leading(const Matrix& gamma, double delta1, double delta2,
                                             const SpcaOptions& opts = {});

/// Solves min_w (v - w)' G (v - w) + ridge ||w||_2^2 + lasso ||w||_1 by
/// cyclic coordinate descent, starting from `warm`. Returns the sweep count
/// through `sweeps` when non-null.
[[nodiscard]] Vector elastic_net_step(const Matrix& gamma, const Vector& v, double ridge,
                                      double lasso, const Vector& warm, double tol,
                                      int max_sweeps, int* sweeps = nullptr);

/// (I - vv') Gamma (I - vv').
[[nodiscard]] Matrix deflate(const Matrix& gamma, const Vector& v);

enum class SparseMethod { qtpm, pmd, spca };

[[nodiscard]] std::string_view to_string(SparseMethod method) noexcept;

/// Per-component tuning for top_m_eigenvectors.
struct ComponentParams {
  SolverOptions qtpm;
  double pmd_delta = 1.0;
  PmdOptions pmd;
  double spca_ridge = 1e-4;
  double spca_lasso = 0.0;
  SpcaOptions spca;
};

/// The first m sparse components by repeated deflation. `params` holds one
/// entry per component, or a single entry reused for all.
[[nodiscard]] std::vector<SparseEigenResult> top_m_eigenvectors(const Matrix& gamma, std::size_t m,
                                                                SparseMethod method,
                                                                std::span<const ComponentParams> params);

/// Sign-aware distance min(||a - b||, ||a + b||).
[[nodiscard]] double sign_aware_distance(const Vector& a, const Vector& b);

}  // namespace coca
