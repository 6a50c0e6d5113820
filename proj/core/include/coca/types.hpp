#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <string_view>

namespace coca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// n x d sample matrix, rows are observations. Construction rejects
/// non-finite entries; sample-size requirements are checked by each
/// estimator since they differ (ranks need 1 row, Spearman needs 3).
class DataMatrix {
 public:
  DataMatrix() = default;
  explicit DataMatrix(Matrix values);

  [[nodiscard]] const Matrix& values() const noexcept { return values_; }
  [[nodiscard]] std::size_t n() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  [[nodiscard]] std::size_t d() const noexcept { return static_cast<std::size_t>(values_.cols()); }
  [[nodiscard]] auto column(std::size_t j) const { return values_.col(static_cast<Eigen::Index>(j)); }

 private:
  Matrix values_;
};

enum class CorrelationKind { pearson, spearman_raw, spearman_sine, psd_projected };
enum class CovarianceKind { pearson, spearman_sine, psd_projected };

struct CorrelationEstimate {
  Matrix matrix;
  CorrelationKind kind = CorrelationKind::pearson;
};

struct CovarianceEstimate {
  Matrix matrix;
  CovarianceKind kind = CovarianceKind::pearson;
};

[[nodiscard]] std::string_view to_string(CorrelationKind kind) noexcept;
[[nodiscard]] std::string_view to_string(CovarianceKind kind) noexcept;

}  // namespace coca
