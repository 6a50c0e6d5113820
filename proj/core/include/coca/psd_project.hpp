#pragma once

#include "coca/error.hpp"
#include "coca/rank_stats.hpp"
#include "coca/types.hpp"

#include <vector>

namespace coca {

struct PsdProjectionOptions {
  double eig_tol = 1e-8;
  double dist_tol = 1e-6;
  int max_iters = 5000;
  double initial_penalty = 1.0;
};

/// The certified bracket [lower, upper] on the optimal distance after one
/// solver iteration. Both ends move monotonically.
struct BracketStep {
  int iteration = 0;
  double lower = 0.0;
  double upper = 0.0;
};

struct PsdProjectionResult {
  Matrix matrix;
  double achieved_distance = 0.0;
  double min_eigenvalue = 0.0;
  double lower_bound = 0.0;  // no PSD matrix is closer to the input than this
  int iterations = 0;
  bool converged = false;
  std::vector<BracketStep> trace;
};

/// Raised when the iteration budget runs out with the bracket still wider
/// than dist_tol. Carries the best feasible iterate found.
class NotConverged : public Error {
 public:
  NotConverged(const std::string& what, PsdProjectionResult best)
      : Error("NotConverged", what), best_(std::move(best)) {}
  [[nodiscard]] const PsdProjectionResult& best() const noexcept { return best_; }

 private:
  PsdProjectionResult best_;
};

/// Element-wise max |a_ij - b_ij|.
[[nodiscard]] double max_norm_distance(const Matrix& a, const Matrix& b);

/// Smallest eigenvalue of a symmetric matrix.
[[nodiscard]] double min_eigenvalue(const Matrix& symmetric);

/// Spectral projection onto the PSD cone (Frobenius-nearest): negative
/// eigenvalues are set to zero.
[[nodiscard]] Matrix clip_eigenvalues(const Matrix& symmetric);

/// Nearest PSD matrix under the element-wise max norm:
///   argmin_{M psd} max_jk |R_jk - M_jk|.
///
/// Solved by ADMM on the splitting M = Z with Z constrained to the PSD cone.
/// Every iterate certifies a bracket around the optimum t*:
///   * Z is PSD, so ||R - Z||max >= t* (upper end);
///   * the scaled dual W = -rho U is PSD, and for any PSD W
///       t* >= -<W, R> / sum_jk |W_jk|
///     because <W, M> >= 0 on the cone while <W, M> <= <W, R> + t sum|W_jk|
///     on the max-norm ball of radius t (lower end).
/// Stops once upper - lower <= dist_tol. The eigenvalue-clipped input seeds
/// the upper end, so the result is never farther than clipping. The diagonal
/// is not constrained.
[[nodiscard]] PsdProjectionResult project_psd_maxnorm(const Matrix& input,
                                                      const PsdProjectionOptions& opts = {});

[[nodiscard]] PsdProjectionResult project_psd_maxnorm(const CorrelationEstimate& input,
                                                      const PsdProjectionOptions& opts = {});

/// Lower bound on the projection distance certified by a PSD matrix w.
[[nodiscard]] double dual_lower_bound(const Matrix& input, const Matrix& w);

/// Wraps a projection result as a correlation estimate of kind psd-projected.
[[nodiscard]] CorrelationEstimate as_estimate(const PsdProjectionResult& projected);

/// S_jk = sigma_j sigma_k Rtilde_jk. Throws DegenerateColumn on a zero sigma.
[[nodiscard]] CovarianceEstimate scaled_covariance(const PsdProjectionResult& projected,
                                                   const MarginalMoments& moments);

}  // namespace coca
