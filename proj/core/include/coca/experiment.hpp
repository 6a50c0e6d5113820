#pragma once

#include "coca/evalkit.hpp"
#include "coca/sparse_eigen.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace coca {

/// Sparse PCA solvers compared by the harness. `tpower` is the q = 0
/// truncated power method tuned by k; `qtpm` uses 0 < q <= 1 tuned by R_q.
enum class Method { pmd, spca, tpower, qtpm };

/// Input matrix fed to the solvers. `oracle` is the Pearson correlation of
/// the latent Gaussian draws, before transformation and contamination.
enum class Estimator { pearson, spearman, oracle };

/// How the (possibly indefinite) sine-transformed Spearman matrix is made
/// usable by the solvers.
enum class SpearmanPsd { projected, shifted, raw };

[[nodiscard]] std::string_view to_string(Method m) noexcept;
[[nodiscard]] std::string_view to_string(Estimator e) noexcept;
[[nodiscard]] std::string_view to_string(SpearmanPsd p) noexcept;
[[nodiscard]] bool parse(std::string_view text, Method& out) noexcept;
[[nodiscard]] bool parse(std::string_view text, Estimator& out) noexcept;
[[nodiscard]] bool parse(std::string_view text, SpearmanPsd& out) noexcept;

/// `count` log-spaced points from lo to hi inclusive.
[[nodiscard]] std::vector<double> log_grid(double lo, double hi, std::size_t count);

struct TuningGrids {
  std::vector<double> tpower_k;     // support sizes
  std::vector<double> qtpm_radius;  // R_q values
  double qtpm_q = 0.5;
  std::vector<double> pmd_delta;    // l1 radii
  std::vector<double> spca_lasso;   // delta2 values
  double spca_ridge = 1e-4;         // delta1

  /// k in {2, 4, ..., 40}; PMD 20 log-spaced radii in [1, sqrt d]; SPCA 20
  /// log-spaced lasso penalties in [0.01, 2]; qTPM 20 log-spaced radii in
  /// [1.5, d^(1 - q/2)].
  [[nodiscard]] static TuningGrids defaults(std::size_t d, double q = 0.5);
  [[nodiscard]] const std::vector<double>& for_method(Method m) const;
};

struct ExperimentConfig {
  int scheme = 1;
  std::size_t n = 200;
  std::size_t d = 100;
  std::size_t s = 10;
  double r = 0.0;
  double magnitude = 5.0;
  std::vector<Method> methods{Method::tpower};
  std::vector<Estimator> estimators{Estimator::pearson, Estimator::spearman, Estimator::oracle};
  TuningGrids grids = TuningGrids::defaults(100);
  std::size_t replicates = 100;
  std::uint64_t base_seed = 20131001;
  std::size_t threads = 0;  // 0: available parallelism
  SpearmanPsd spearman_psd = SpearmanPsd::projected;

  /// Throws InvalidInput naming the offending field.
  void validate() const;
};

struct CellKey {
  Method method{};
  Estimator estimator{};
  int scheme = 1;
  std::size_t n = 0;
  double r = 0.0;
  auto operator<=>(const CellKey&) const = default;
};

/// Mean and sd of sin(theta1, estimate at the oracle delta) over replicates.
struct ReplicationSummary {
  CellKey key;
  MeanSd sin_angle;
  std::size_t replicates = 0;
  std::size_t excluded = 0;        // replicates with no usable path point
  std::size_t failed_points = 0;   // solver failures across the whole path
  std::size_t unconverged_points = 0;
  MeanSd oracle_delta;
};

/// Everything one replicate produced for one (estimator, method) pair.
struct ReplicateOutcome {
  std::vector<PathPoint> path;     // one per grid value, failures scored as empty support
  std::vector<double> sin_angles;  // per grid value, NaN on failure
  double best_delta = 0.0;
  double best_sin_angle = 0.0;
  Vector best_vector;  // estimate at best_delta, empty when unusable
  bool usable = false;
  std::size_t failed = 0;
  std::size_t unconverged = 0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<ReplicationSummary> cells;
  std::map<CellKey, RocCurve> roc;
  std::vector<std::uint64_t> replicate_seeds;
  std::size_t psd_not_converged = 0;  // Spearman projections that fell back to their best iterate
};

[[nodiscard]] Sparsity sparsity_of(Method m) noexcept;

/// Sample, contaminate, estimate, solve over the grid and score each
/// replicate; aggregate in replicate order. Deterministic given base_seed
/// regardless of the thread count.
[[nodiscard]] ExperimentResult replicate_experiment(const ExperimentConfig& config);

/// Solver input for one estimator on one replicate's data.
[[nodiscard]] Matrix estimator_matrix(Estimator e, const DataMatrix& observed, const DataMatrix& latent,
                                      SpearmanPsd psd, bool* psd_fallback = nullptr);

/// Runs `method` over its grid on gamma and scores against theta1.
[[nodiscard]] ReplicateOutcome solve_path(const Matrix& gamma, Method method, const TuningGrids& grids,
                                          const Vector& theta1);

}  // namespace coca
