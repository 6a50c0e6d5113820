#include "coca/error.hpp"
#include "coca/nonparanormal.hpp"
#include "coca/rank_stats.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

using namespace coca;

namespace {

// Composite Simpson rule for E g(Z), Z standard normal, on [-12, 12].
template <class F>
double normal_expectation(F g) {
  const int steps = 24000;
  const double a = -12, h = 24.0 / steps;
  double sum = 0;
  for (int i = 0; i <= steps; ++i) {
    const double t = a + i * h;
    const double w = (i == 0 || i == steps) ? 1 : (i % 2 ? 4 : 2);
    sum += w * g(t) * std::exp(-t * t / 2) / std::sqrt(2 * M_PI);
  }
  return sum * h / 3;
}

}  // namespace

TEST_CASE("synthesize_model closed form") {
  const auto m = synthesize_model(100, 10);
  for (Eigen::Index j = 0; j < 100; ++j) {
    const double expected = j < 10 ? 1.4 : (j < 20 ? 1.1 : 1.0);
    CHECK(m.sigma(j, j) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(m.sigma0(j, j) == 1.0);
  }
  CHECK(m.sigma0(0, 1) == doctest::Approx(2.0 / 7).epsilon(1e-14));
  CHECK(m.sigma0(10, 11) == doctest::Approx(1.0 / 11).epsilon(1e-14));
  CHECK(m.sigma0(0, 10) == 0.0);
  CHECK(m.u1.dot(m.u2) == 0.0);
  CHECK(m.u1.norm() == doctest::Approx(1.0));
  CHECK(m.u1(0) == doctest::Approx(1 / std::sqrt(10.0)));

  Eigen::SelfAdjointEigenSolver<Matrix> eig(m.sigma);
  const Vector ev = eig.eigenvalues().reverse();
  CHECK(std::abs(ev(0) - 5) <= 1e-8);
  CHECK(std::abs(ev(1) - 2) <= 1e-8);
  CHECK((ev.tail(98).array() - 1).abs().maxCoeff() <= 1e-8);
  CHECK((m.sigma_eigenvalues - ev).cwiseAbs().maxCoeff() <= 1e-8);

  Eigen::SelfAdjointEigenSolver<Matrix> eig0(m.sigma0);
  CHECK(eig0.eigenvalues()(99) == doctest::Approx(25.0 / 7).epsilon(1e-10));
  CHECK(m.sigma0_eigenvalues(0) == doctest::Approx(25.0 / 7).epsilon(1e-10));
  CHECK(m.sigma0_eigenvalues(1) == doctest::Approx(1 + 9.0 / 11).epsilon(1e-10));
  CHECK(oracle::sin_angle(m.theta1, oracle::leading_eigenvector(m.sigma0)) <= 1e-10);
  for (Eigen::Index j = 0; j < 100; ++j) {
    CHECK(m.theta1(j) == (j < 10 ? doctest::Approx(1 / std::sqrt(10.0)) : doctest::Approx(0.0)));
    CHECK(std::abs(m.theta2(j)) == (j >= 10 && j < 20 ? doctest::Approx(1 / std::sqrt(10.0)) : doctest::Approx(0.0)));
  }

  CHECK_THROWS_AS((void)synthesize_model(19, 10), InvalidDimension);
  CHECK_NOTHROW((void)synthesize_model(20, 10));
}

TEST_CASE("transform constants") {
  const auto& c = transform_constants();
  CHECK(c.abs_moment == doctest::Approx(0.7978845608).epsilon(1e-9));
  CHECK(c.sixth_moment == 15.0);
  CHECK(c.exp_mean == doctest::Approx(1.6487212707).epsilon(1e-9));
  CHECK(c.cdf_mean == 0.5);
  CHECK(c.cdf_variance == doctest::Approx(1.0 / 12));
  const auto q = quadrature_constants();
  CHECK(std::abs(q.abs_moment - c.abs_moment) <= 1e-6);
  CHECK(std::abs(q.cdf_mean - c.cdf_mean) <= 1e-6);
  CHECK(std::abs(q.cdf_variance - c.cdf_variance) <= 1e-6);
  CHECK(std::abs(q.sixth_moment - c.sixth_moment) <= 1e-6);
  CHECK(std::abs(q.exp_mean - c.exp_mean) <= 1e-6);
  CHECK(std::abs(q.exp_variance - c.exp_variance) <= 1e-6);
}

TEST_CASE("inverse transforms have unit variance and are strictly increasing") {
  for (auto t : {Transform::h0, Transform::h1, Transform::h2, Transform::h3, Transform::h4, Transform::h5}) {
    CAPTURE(to_string(t));
    const double mean = normal_expectation([t](double z) { return inverse_transform(t, z); });
    const double second = normal_expectation([t](double z) { return std::pow(inverse_transform(t, z), 2); });
    CHECK(std::abs(second - mean * mean - 1) <= 1e-6);
    if (t == Transform::h3 || t == Transform::h5) CHECK(std::abs(mean) <= 1e-6);
    CHECK(parse_transform(to_string(t)) == t);
  }
  CHECK(inverse_transform(Transform::h0, 1.25) == 1.25);
  CHECK_FALSE(parse_transform("h9").has_value());

  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0, 3);
  for (int i = 0; i < 10000; ++i) {
    double a = g(rng), b = g(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    for (auto t : {Transform::h1, Transform::h2, Transform::h3, Transform::h4, Transform::h5})
      CHECK(inverse_transform(t, a) < inverse_transform(t, b));
  }
}

TEST_CASE("transform sets") {
  const auto lin = scheme_transforms(1, 7);
  CHECK(lin == TransformSet(7, Transform::h0));
  const auto non = scheme_transforms(2, 7);
  CHECK(non == TransformSet{Transform::h1, Transform::h2, Transform::h3, Transform::h4, Transform::h5,
                            Transform::h1, Transform::h2});
  CHECK_THROWS_AS((void)scheme_transforms(3, 7), InvalidInput);
}

TEST_CASE("sample_nonparanormal Monte Carlo") {
  const auto s = sample_nonparanormal(Matrix::Identity(3, 3), linear_transforms(3), 100000, 7);
  const Matrix c = pearson_correlation(s.x).matrix;
  CHECK((c - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 0.02);

  Matrix s0(2, 2);
  s0 << 1, 0.5, 0.5, 1;
  const auto t = sample_nonparanormal(s0, nonlinear_transforms(2), 100000, 11);
  CHECK(std::abs(spearman_sine_matrix(t.x).matrix(0, 1) - 0.5) <= 0.02);
}

TEST_CASE("ranks are invariant under the transforms") {
  const auto model = synthesize_model(20, 5);
  const auto s = sample_nonparanormal(model.sigma0, nonlinear_transforms(20), 300, 3);
  CHECK(spearman_rho_matrix(s.x).matrix == spearman_rho_matrix(s.latent).matrix);
  CHECK(rank_matrix(s.x) == rank_matrix(s.latent));
}

TEST_CASE("sampling is deterministic given the seed") {
  const auto model = synthesize_model(30, 10);
  const auto a = sample_nonparanormal(model.sigma0, nonlinear_transforms(30), 50, 99);
  const auto b = sample_nonparanormal(model.sigma0, nonlinear_transforms(30), 50, 99);
  const auto c = sample_nonparanormal(model.sigma0, nonlinear_transforms(30), 50, 100);
  CHECK(a.x.values() == b.x.values());
  CHECK(a.x.values() != c.x.values());

  Matrix bad(2, 2);
  bad << 1, 2, 2, 1;
  CHECK_THROWS_AS((void)sample_nonparanormal(bad, linear_transforms(2), 5, 1), NotPsd);

  // a singular but PSD correlation needs the spectral fallback
  const Matrix ones = Matrix::Ones(3, 3);
  const auto singular = sample_nonparanormal(ones, linear_transforms(3), 10, 1);
  CHECK((singular.x.values().col(0) - singular.x.values().col(2)).cwiseAbs().maxCoeff() <= 1e-7);
}

TEST_CASE("contaminate") {
  std::mt19937_64 rng(1);
  const DataMatrix data(oracle::random_data(rng, 100, 8));
  const auto none = contaminate(data, {0.0, 5.0}, 3);
  CHECK(none.data.values() == data.values());
  CHECK(none.entries.empty());

  CHECK(ContaminationSpec{0.05}.count(100) == 5);
  CHECK(ContaminationSpec{0.07}.count(100) == 7);  // 100 * 0.07 = 7.000000000000001
  CHECK(ContaminationSpec{0.29}.count(100) == 29);  // 100 * 0.29 = 28.999999999999996
  CHECK(ContaminationSpec{0.1}.count(15) == 1);

  for (double rate : {0.05, 0.1}) {
    const auto res = contaminate(data, {rate, 5.0}, 42);
    const std::size_t expected = rate == 0.05 ? 5 : 10;
    CHECK(res.entries.size() == expected * 8);
    for (std::size_t j = 0; j < 8; ++j) {
      std::set<std::size_t> rows;
      for (const auto& e : res.entries)
        if (e.column == j) rows.insert(e.row);
      CHECK(rows.size() == expected);
      std::size_t changed = 0;
      for (std::size_t i = 0; i < 100; ++i) {
        const double v = res.data.values()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (rows.count(i)) CHECK(std::abs(v) == 5.0);
        else CHECK(v == data.values()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        changed += rows.count(i);
      }
      CHECK(changed == expected);
    }
    const auto again = contaminate(data, {rate, 5.0}, 42);
    CHECK(again.data.values() == res.data.values());
  }

  std::size_t positive = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    for (const auto& e : contaminate(data, {0.1, 5.0}, seed).entries) {
      positive += e.value > 0;
      ++total;
    }
  }
  CHECK(std::abs(static_cast<double>(positive) / total - 0.5) <= 0.05);

  CHECK_THROWS_AS((void)contaminate(data, {1.0, 5.0}, 1), InvalidInput);
  CHECK_THROWS_AS((void)contaminate(data, {-0.1, 5.0}, 1), InvalidInput);
}
