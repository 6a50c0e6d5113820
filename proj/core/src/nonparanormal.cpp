#include "coca/nonparanormal.hpp"

#include "coca/error.hpp"
#include "coca/rank_stats.hpp"
#include "coca/rng.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

namespace coca {

SyntheticModel synthesize_model(std::size_t d, std::size_t s) {
  if (s == 0 || d < 2 * s) throw InvalidDimension("synthetic model needs s >= 1 and d >= 2s");
  const auto di = static_cast<Eigen::Index>(d);
  const auto si = static_cast<Eigen::Index>(s);

  SyntheticModel m;
  m.d = d;
  m.s = s;
  const double entry = 1.0 / std::sqrt(static_cast<double>(s));
  m.u1 = Vector::Zero(di);
  m.u2 = Vector::Zero(di);
  m.u1.head(si).setConstant(entry);
  m.u2.segment(si, si).setConstant(entry);

  m.sigma = Matrix::Identity(di, di) + (m.omega1 - 1.0) * m.u1 * m.u1.transpose() +
            (m.omega2 - 1.0) * m.u2 * m.u2.transpose();
  const Vector inv_sd = m.sigma.diagonal().cwiseSqrt().cwiseInverse();
  m.sigma0 = inv_sd.asDiagonal() * m.sigma * inv_sd.asDiagonal();
  m.sigma0.diagonal().setOnes();

  Eigen::SelfAdjointEigenSolver<Matrix> eig0(m.sigma0);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m.sigma, Eigen::EigenvaluesOnly);
  if (eig0.info() != Eigen::Success || eig.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition of the synthetic model failed");
  }
  m.sigma0_eigenvalues = eig0.eigenvalues().reverse();
  m.sigma_eigenvalues = eig.eigenvalues().reverse();
  m.theta1 = eig0.eigenvectors().col(di - 1);
  m.theta2 = eig0.eigenvectors().col(di - 2);
  // eigenvectors come back dense at rounding level; zero out off-block noise
  for (Vector* v : {&m.theta1, &m.theta2}) {
    for (Eigen::Index i = 0; i < di; ++i) {
      if (std::abs((*v)(i)) < 1e-12) (*v)(i) = 0.0;
    }
    v->normalize();
    Eigen::Index arg = 0;
    v->cwiseAbs().maxCoeff(&arg);
    if ((*v)(arg) < 0.0) *v = -*v;
  }
  return m;
}

std::string_view to_string(Transform t) noexcept {
  switch (t) {
    case Transform::h0: return "h0";
    case Transform::h1: return "h1";
    case Transform::h2: return "h2";
    case Transform::h3: return "h3";
    case Transform::h4: return "h4";
    case Transform::h5: return "h5";
  }
  return "unknown";
}

std::optional<Transform> parse_transform(std::string_view name) noexcept {
  for (Transform t : {Transform::h0, Transform::h1, Transform::h2, Transform::h3, Transform::h4,
                      Transform::h5}) {
    if (to_string(t) == name) return t;
  }
  return std::nullopt;
}

const TransformConstants& transform_constants() noexcept {
  static const TransformConstants constants{
      std::sqrt(2.0 / std::numbers::pi),
      0.5,
      1.0 / 12.0,
      15.0,
      std::sqrt(std::numbers::e),
      std::numbers::e * std::numbers::e - std::numbers::e,
  };
  return constants;
}

TransformConstants quadrature_constants() {
  using boost::math::quadrature::gauss_kronrod;
  constexpr double inf = std::numeric_limits<double>::infinity();
  const auto phi = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi); };
  const auto integrate = [&](auto f) {
    // the density underflows before e^t overflows; skip the tails where it is 0
    return gauss_kronrod<double, 61>::integrate(
        [&](double t) {
          const double w = phi(t);
          return w == 0.0 ? 0.0 : f(t) * w;
        },
        -inf, inf, 15, 1e-13);
  };
  TransformConstants c{};
  c.abs_moment = integrate([](double t) { return std::abs(t); });
  c.cdf_mean = integrate([](double t) { return normal_cdf(t); });
  c.cdf_variance = integrate([&](double t) {
    const double u = normal_cdf(t) - c.cdf_mean;
    return u * u;
  });
  c.sixth_moment = integrate([](double t) { return std::pow(t, 6); });
  c.exp_mean = integrate([](double t) { return std::exp(t); });
  c.exp_variance = integrate([&](double t) {
    const double u = std::exp(t) - c.exp_mean;
    return u * u;
  });
  return c;
}

double inverse_transform(Transform t, double z) {
  const auto& c = transform_constants();
  switch (t) {
    case Transform::h0:
    case Transform::h1:
      return z;
    case Transform::h2:
      return std::copysign(std::sqrt(std::abs(z)), z) / std::sqrt(c.abs_moment);
    case Transform::h3:
      return (normal_cdf(z) - c.cdf_mean) / std::sqrt(c.cdf_variance);
    case Transform::h4:
      return z * z * z / std::sqrt(c.sixth_moment);
    case Transform::h5:
      return (std::exp(z) - c.exp_mean) / std::sqrt(c.exp_variance);
  }
  return z;
}

TransformSet linear_transforms(std::size_t d) { return TransformSet(d, Transform::h0); }

TransformSet nonlinear_transforms(std::size_t d) {
  static constexpr Transform cycle[] = {Transform::h1, Transform::h2, Transform::h3, Transform::h4,
                                        Transform::h5};
  TransformSet out(d);
  for (std::size_t j = 0; j < d; ++j) out[j] = cycle[j % 5];
  return out;
}

TransformSet scheme_transforms(int scheme, std::size_t d) {
  switch (scheme) {
    case 1: return linear_transforms(d);
    case 2: return nonlinear_transforms(d);
    default: throw InvalidInput("scheme must be 1 or 2");
  }
}

namespace {

Matrix gaussian_factor(const Matrix& sigma0) {
  Eigen::LLT<Matrix> llt(sigma0);
  if (llt.info() == Eigen::Success) return llt.matrixL();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma0);
  if (eig.info() != Eigen::Success) throw NotPsd("factorization of the latent correlation failed");
  const Vector& lambda = eig.eigenvalues();
  const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());
  if (lambda(0) < -1e-8 * scale) throw NotPsd("latent correlation matrix is not positive semidefinite");
  return eig.eigenvectors() * lambda.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

}  // namespace

NonparanormalSample sample_nonparanormal(const Matrix& sigma0, const TransformSet& transforms,
                                         std::size_t n, std::uint64_t seed) {
  if (sigma0.rows() != sigma0.cols()) throw InvalidInput("latent correlation must be square");
  if (transforms.size() != static_cast<std::size_t>(sigma0.rows())) {
    throw InvalidInput("one transform per coordinate is required");
  }
  const Matrix factor = gaussian_factor(sigma0);
  const Eigen::Index d = sigma0.rows();
  const auto ni = static_cast<Eigen::Index>(n);

  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(ni, d);
  for (Eigen::Index i = 0; i < ni; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) g(i, j) = normal(rng);
  }
  Matrix z = g * factor.transpose();
  Matrix x(ni, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const Transform t = transforms[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < ni; ++i) x(i, j) = inverse_transform(t, z(i, j));
  }
  return {DataMatrix(std::move(x)), DataMatrix(std::move(z))};
}

std::size_t ContaminationSpec::count(std::size_t n) const {
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * rate + 1e-9));
}

ContaminationResult contaminate(const DataMatrix& data, const ContaminationSpec& spec,
                                std::uint64_t seed) {
  if (!(spec.rate >= 0.0 && spec.rate < 1.0)) throw InvalidInput("contamination rate must lie in [0, 1)");
  const std::size_t n = data.n();
  const std::size_t count = spec.count(n);
  ContaminationResult out{data, {}};
  if (count == 0) return out;

  Matrix x = data.values();
  Rng rng = make_rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::vector<std::size_t> rows(n);
  for (std::size_t j = 0; j < data.d(); ++j) {
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    // partial Fisher-Yates: the first `count` slots become a uniform sample without replacement
    for (std::size_t i = 0; i < count; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(rows[i], rows[pick(rng)]);
      const double value = coin(rng) ? spec.magnitude : -spec.magnitude;
      x(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(j)) = value;
      out.entries.push_back({rows[i], j, value});
    }
  }
  out.data = DataMatrix(std::move(x));
  return out;
}

}  // namespace coca
