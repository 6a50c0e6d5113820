#pragma once

#include "coca/types.hpp"

#include <span>
#include <vector>

namespace coca {

/// Per-column means and standard deviations. The standard deviation uses
/// the 1/n divisor. `constant` flags columns whose std is exactly zero.
struct MarginalMoments {
  Vector means;
  Vector stds;
  std::vector<bool> constant;

  [[nodiscard]] bool any_constant() const noexcept;
};

/// Midranks (1-based). Ties share the average of the ranks they span.
/// Throws InvalidData on a non-finite entry.
[[nodiscard]] std::vector<double> compute_ranks(std::span<const double> column);

/// Applies compute_ranks to every column.
[[nodiscard]] Matrix rank_matrix(const DataMatrix& data);

[[nodiscard]] MarginalMoments marginal_moments(const DataMatrix& data);

/// Spearman's rho: Pearson correlation of the midrank columns.
/// Requires n >= 3; a constant column throws DegenerateColumn.
[[nodiscard]] CorrelationEstimate spearman_rho_matrix(const DataMatrix& data);

/// Maps rho to 2 sin(pi rho / 6) off the diagonal, sets the diagonal to 1.
[[nodiscard]] CorrelationEstimate sine_transform(const CorrelationEstimate& rho);

/// Sine-transformed Spearman correlation in one call.
[[nodiscard]] CorrelationEstimate spearman_sine_matrix(const DataMatrix& data);

/// S_jk = sigma_j sigma_k R_jk with R the sine-transformed Spearman matrix.
[[nodiscard]] CovarianceEstimate spearman_covariance(const DataMatrix& data);

/// Sample (Pearson) correlation. Requires n >= 2.
[[nodiscard]] CorrelationEstimate pearson_correlation(const DataMatrix& data);

/// Replaces each entry by the standard normal quantile of r_ij / (n + 1).
[[nodiscard]] DataMatrix normal_scores(const DataMatrix& data);

/// Standard normal quantile.
[[nodiscard]] double normal_quantile(double p);

/// Standard normal CDF.
[[nodiscard]] double normal_cdf(double x);

}  // namespace coca
