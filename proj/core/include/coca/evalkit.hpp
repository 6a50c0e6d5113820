#pragma once

#include "coca/types.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace coca {

/// sqrt(1 - (a'b)^2), clamped at zero. Both inputs must be unit-norm to
/// 1e-8, else InvalidVector.
[[nodiscard]] double sin_angle(const Vector& a, const Vector& b);

struct SupportMetrics {
  std::size_t fpn = 0;
  std::size_t fnn = 0;
  double fpr = 0.0;  // fpn / (d - s)
  double fnr = 0.0;  // fnn / s
};

/// Support recovery of `estimate` against the nonzeros of `truth`.
[[nodiscard]] SupportMetrics support_metrics(const Vector& truth, const Vector& estimate);

/// Same, from index sets. `truth` must be nonempty and smaller than d.
[[nodiscard]] SupportMetrics support_metrics(std::span<const std::size_t> truth,
                                             std::span<const std::size_t> estimate, std::size_t d);

/// Metrics of one replicate at one tuning value.
struct PathPoint {
  double delta = 0.0;
  SupportMetrics metrics;
};

struct RocPoint {
  double delta = 0.0;
  double fpr = 0.0;  // mean over replicates
  double tpr = 0.0;  // mean of 1 - fnr over replicates
  std::size_t replicates = 0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // sorted by fpr, then tpr
  double auc = 0.0;              // trapezoid area over [min fpr, max fpr]
  double fpr_min = 0.0;
  double fpr_max = 0.0;
  bool degenerate = false;       // observed fpr range has zero width
};

/// Groups per-replicate path points by delta and averages them. Throws
/// InvalidInput on empty input or fewer than two distinct deltas.
[[nodiscard]] RocCurve roc_curve(std::span<const PathPoint> results);

/// Trapezoid area under the curve restricted to [lo, hi] (linear
/// interpolation at the ends). Zero when the ranges do not overlap.
[[nodiscard]] double partial_auc(const RocCurve& curve, double lo, double hi);

/// Which end of a tuning path gives the sparser solution.
enum class Sparsity { smaller_is_sparser, larger_is_sparser };

/// argmin over delta of fpr + fnr; ties go to the sparser delta.
/// Throws InvalidInput on empty input.
[[nodiscard]] double oracle_delta(std::span<const PathPoint> results, Sparsity direction);

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (n - 1 divisor); 0 for one value
  std::size_t count = 0;
};

/// Sequential fold in input order, so results are reproducible bit for bit.
[[nodiscard]] MeanSd mean_sd(std::span<const double> values);

/// Empirical max-norm error of the sine-transformed Spearman matrix on
/// Gaussian data, per sample size.
struct RateRow {
  std::size_t n = 0;
  double mean_error = 0.0;
  double sd_error = 0.0;
  double rate = 0.0;         // sqrt(log d / n)
  double scaled = 0.0;       // mean_error / rate
  double bound = 0.0;        // 8 pi sqrt(log d / n)
  bool bound_holds = true;   // every replicate below the bound
  bool bound_vacuous = false;  // bound >= 2, the largest possible error
};

struct RateCheck {
  std::size_t d = 0;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  std::vector<RateRow> rows;
};

/// ns must be increasing with each n >= 21 / log d + 2. The latent
/// correlation is the synthetic spiked model of dimension d.
[[nodiscard]] RateCheck rate_check(std::span<const std::size_t> ns, std::size_t d,
                                   std::size_t replicates, std::uint64_t seed,
                                   std::size_t threads = 1);

}  // namespace coca
