#pragma once

#include "coca/types.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace coca {

/// Spiked covariance with two sparse leading eigenvectors (blocks of size s)
/// and its latent correlation matrix.
struct SyntheticModel {
  std::size_t d = 0;
  std::size_t s = 0;
  double omega1 = 5.0;
  double omega2 = 2.0;
  Matrix sigma;    // I + (omega1 - 1) u1 u1' + (omega2 - 1) u2 u2'
  Matrix sigma0;   // D^{-1/2} sigma D^{-1/2}
  Vector u1, u2;   // covariance eigenvectors
  Vector theta1, theta2;  // leading eigenvectors of sigma0 (computed, oriented)
  Vector sigma_eigenvalues;   // descending
  Vector sigma0_eigenvalues;  // descending
};

/// Throws InvalidDimension when d < 2s.
[[nodiscard]] SyntheticModel synthesize_model(std::size_t d, std::size_t s = 10);

/// Marginal transforms: h0 is the identity; h1..h5 follow the nonlinear
/// scheme (identity, signed square root, normal CDF, cube, exponential),
/// each standardized to unit variance under a standard normal input.
enum class Transform { h0, h1, h2, h3, h4, h5 };

[[nodiscard]] std::string_view to_string(Transform t) noexcept;
[[nodiscard]] std::optional<Transform> parse_transform(std::string_view name) noexcept;

/// Normalization constants of the transforms, closed form.
struct TransformConstants {
  double abs_moment;     // E|Z| = sqrt(2/pi), divisor of h2 is its square root
  double cdf_mean;       // E Phi(Z) = 1/2
  double cdf_variance;   // Var Phi(Z) = 1/12
  double sixth_moment;   // E Z^6 = 15
  double exp_mean;       // E e^Z = sqrt(e)
  double exp_variance;   // Var e^Z = e^2 - e
};

[[nodiscard]] const TransformConstants& transform_constants() noexcept;

/// The same constants by adaptive quadrature against the standard normal density.
[[nodiscard]] TransformConstants quadrature_constants();

/// Evaluates the inverse transform h^{-1}(z).
[[nodiscard]] double inverse_transform(Transform t, double z);

using TransformSet = std::vector<Transform>;

/// h0 on every coordinate.
[[nodiscard]] TransformSet linear_transforms(std::size_t d);
/// h1, h2, h3, h4, h5, h1, ... cycling across coordinates.
[[nodiscard]] TransformSet nonlinear_transforms(std::size_t d);
/// Scheme 1 is linear, scheme 2 nonlinear.
[[nodiscard]] TransformSet scheme_transforms(int scheme, std::size_t d);

/// A draw X = h^{-1}(Z) together with the latent Gaussian Z it came from.
struct NonparanormalSample {
  DataMatrix x;
  DataMatrix latent;
};

/// Z ~ N(0, sigma0) through a Cholesky factor (spectral factor when
/// Cholesky fails), then X_j = h_j^{-1}(Z_j). Deterministic given seed.
/// Throws NotPsd when sigma0 has a clearly negative eigenvalue.
[[nodiscard]] NonparanormalSample sample_nonparanormal(const Matrix& sigma0,
                                                       const TransformSet& transforms,
                                                       std::size_t n, std::uint64_t seed);

struct ContaminationSpec {
  double rate = 0.0;
  double magnitude = 5.0;

  /// floor(n r), guarded against representation error in n * r.
  [[nodiscard]] std::size_t count(std::size_t n) const;
};

struct ContaminatedEntry {
  std::size_t row = 0;
  std::size_t column = 0;
  double value = 0.0;
};

struct ContaminationResult {
  DataMatrix data;
  std::vector<ContaminatedEntry> entries;
};

/// In every column, floor(n r) distinct rows are replaced by +magnitude or
/// -magnitude with equal probability. Deterministic given seed.
[[nodiscard]] ContaminationResult contaminate(const DataMatrix& data, const ContaminationSpec& spec,
                                              std::uint64_t seed);

}  // namespace coca
