#include "coca/error.hpp"
#include "coca/evalkit.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace coca;

namespace {

std::vector<std::size_t> range(std::size_t lo, std::size_t hi) {
  std::vector<std::size_t> out(hi - lo);
  std::iota(out.begin(), out.end(), lo);
  return out;
}

PathPoint point(double delta, double fpr, double fnr) {
  PathPoint p;
  p.delta = delta;
  p.metrics.fpr = fpr;
  p.metrics.fnr = fnr;
  return p;
}

}  // namespace

TEST_CASE("sin_angle") {
  std::mt19937_64 rng(1);
  const Vector v = oracle::random_unit(rng, 5);
  CHECK(sin_angle(v, v) == 0.0);
  CHECK(sin_angle(v, -v) == 0.0);
  CHECK(sin_angle(Vector::Unit(3, 0), Vector::Unit(3, 1)) == 1.0);
  Vector a(2), b(2);
  a << 1, 0;
  b << 0.8, 0.6;
  CHECK(sin_angle(a, b) == doctest::Approx(0.6).epsilon(1e-14));
  const Vector w = oracle::random_unit(rng, 5);
  CHECK(sin_angle(v, w) == sin_angle(w, v));
  CHECK(sin_angle(-v, w) == sin_angle(v, w));
  CHECK(sin_angle(v, w) == doctest::Approx(oracle::sin_angle(v, w)).epsilon(1e-12));
  CHECK_THROWS_AS((void)sin_angle(2 * v, w), InvalidVector);
}

TEST_CASE("support_metrics") {
  const auto truth = range(0, 10);
  auto est = range(0, 9);
  est.push_back(10);
  auto m = support_metrics(truth, est, 100);
  CHECK(m.fpn == 1);
  CHECK(m.fnn == 1);
  CHECK(m.fpr == doctest::Approx(1.0 / 90));
  CHECK(m.fnr == doctest::Approx(0.1));

  m = support_metrics(truth, truth, 100);
  CHECK(m.fpn + m.fnn == 0);
  CHECK(m.fpr + m.fnr == 0.0);

  m = support_metrics(truth, std::vector<std::size_t>{}, 100);
  CHECK(m.fpr == 0.0);
  CHECK(m.fnr == 1.0);

  Vector t = Vector::Zero(6), e = Vector::Zero(6);
  t.head(2).setConstant(0.5);
  e(1) = -0.3;
  e(4) = 0.1;
  m = support_metrics(t, e);
  CHECK(m.fpn == 1);
  CHECK(m.fnn == 1);
  CHECK(m.fpr == 0.25);
  CHECK(m.fnr == 0.5);

  CHECK_THROWS_AS((void)support_metrics(std::vector<std::size_t>{}, truth, 100), InvalidInput);
  CHECK_THROWS_AS((void)support_metrics(range(0, 100), truth, 100), InvalidInput);
}

TEST_CASE("roc_curve averages per delta") {
  // three replicates, two tuning values
  const std::vector<PathPoint> path{point(2, 0.0, 0.5), point(4, 0.1, 0.2),  //
                                    point(2, 0.1, 0.4), point(4, 0.2, 0.1),  //
                                    point(2, 0.2, 0.3), point(4, 0.6, 0.0)};
  const auto curve = roc_curve(path);
  REQUIRE(curve.points.size() == 2);
  CHECK(curve.points[0].delta == 2);
  CHECK(curve.points[0].fpr == doctest::Approx(0.1));
  CHECK(curve.points[0].tpr == doctest::Approx(0.6));
  CHECK(curve.points[0].replicates == 3);
  CHECK(curve.points[1].fpr == doctest::Approx(0.3));
  CHECK(curve.points[1].tpr == doctest::Approx(0.9));
  CHECK(curve.auc == doctest::Approx(0.2 * 0.75));
  CHECK(curve.fpr_min == doctest::Approx(0.1));
  CHECK(curve.fpr_max == doctest::Approx(0.3));
  CHECK_FALSE(curve.degenerate);

  CHECK(partial_auc(curve, 0.1, 0.2) == doctest::Approx(0.1 * (0.6 + 0.75) / 2));
  CHECK(partial_auc(curve, 0.5, 0.9) == 0.0);

  CHECK_THROWS_AS((void)roc_curve(std::vector<PathPoint>{}), InvalidInput);
  CHECK_THROWS_AS((void)roc_curve(std::vector<PathPoint>{point(1, 0, 0), point(1, 0, 0)}), InvalidInput);
}

TEST_CASE("roc_curve degenerate and random-guess cases") {
  std::vector<PathPoint> perfect;
  for (double delta : {1.0, 2.0, 3.0}) perfect.push_back(point(delta, 0, 0));
  const auto flat = roc_curve(perfect);
  CHECK(flat.degenerate);
  for (const auto& p : flat.points) {
    CHECK(p.fpr == 0.0);
    CHECK(p.tpr == 1.0);
  }

  // supports drawn uniformly at random: expected tpr = fpr = k / d
  const std::size_t d = 100, s = 10;
  std::mt19937_64 rng(12);
  std::vector<std::size_t> perm = range(0, d);
  std::vector<PathPoint> path;
  for (int rep = 0; rep < 200; ++rep) {
    for (std::size_t k = 5; k <= 95; k += 10) {
      std::shuffle(perm.begin(), perm.end(), rng);
      std::vector<std::size_t> est(perm.begin(), perm.begin() + static_cast<long>(k));
      path.push_back({static_cast<double>(k), support_metrics(range(0, s), est, d)});
    }
  }
  const auto curve = roc_curve(path);
  for (const auto& p : curve.points) CHECK(std::abs(p.tpr - p.fpr) <= 0.1);
  CHECK(curve.auc / (curve.fpr_max - curve.fpr_min) == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("oracle_delta") {
  CHECK(oracle_delta(std::vector<PathPoint>{point(7, 0.2, 0.2)}, Sparsity::smaller_is_sparser) == 7);
  const std::vector<PathPoint> path{point(1, 0.2, 0.1), point(2, 0.05, 0.05), point(3, 0.1, 0.1)};
  CHECK(oracle_delta(path, Sparsity::smaller_is_sparser) == 2);
  const std::vector<PathPoint> exact{point(1, 0.2, 0.1), point(2, 0, 0), point(3, 0.1, 0.1)};
  CHECK(oracle_delta(exact, Sparsity::larger_is_sparser) == 2);
  const std::vector<PathPoint> tie{point(1, 0.1, 0.0), point(2, 0.0, 0.1), point(3, 0.3, 0.3)};
  CHECK(oracle_delta(tie, Sparsity::smaller_is_sparser) == 1);
  CHECK(oracle_delta(tie, Sparsity::larger_is_sparser) == 2);
  CHECK_THROWS_AS((void)oracle_delta(std::vector<PathPoint>{}, Sparsity::smaller_is_sparser), InvalidInput);
}

TEST_CASE("mean_sd") {
  const std::vector<double> xs{0.07, 0.09};
  const auto m = mean_sd(xs);
  CHECK(m.mean == doctest::Approx(0.08));
  CHECK(m.sd == doctest::Approx(std::sqrt(0.0002)));
  CHECK(m.count == 2);
  CHECK(mean_sd(std::vector<double>{3.0}).sd == 0.0);
  CHECK(mean_sd(std::vector<double>{}).count == 0);
}

TEST_CASE("rate_check scaling") {
  const std::vector<std::size_t> ns{100, 400, 1600};
  const auto rc = rate_check(ns, 50, 200, 2024, 1);
  REQUIRE(rc.rows.size() == 3);
  CHECK(rc.rows[0].bound_vacuous);
  for (std::size_t i = 0; i + 1 < rc.rows.size(); ++i) {
    const double ratio = rc.rows[i].mean_error / rc.rows[i + 1].mean_error;
    CAPTURE(ratio);
    CHECK(ratio >= 1.6);
    CHECK(ratio <= 2.4);
    CHECK(rc.rows[i + 1].mean_error <= rc.rows[i].mean_error);
  }
  for (const auto& row : rc.rows) {
    CHECK(row.bound_holds);
    CHECK(row.bound_vacuous == (row.bound >= 2.0));
    CHECK(row.bound == doctest::Approx(8 * M_PI * row.rate));
    CHECK(row.rate == doctest::Approx(std::sqrt(std::log(50.0) / static_cast<double>(row.n))));
    CHECK(row.sd_error >= 0);
  }

  const auto threaded = rate_check(ns, 50, 20, 5, 3);
  const auto serial = rate_check(ns, 50, 20, 5, 1);
  for (std::size_t i = 0; i < 3; ++i) CHECK(threaded.rows[i].mean_error == serial.rows[i].mean_error);

  CHECK_THROWS_AS((void)rate_check(std::vector<std::size_t>{400, 100}, 50, 2, 1), InvalidInput);
  CHECK_THROWS_AS((void)rate_check(std::vector<std::size_t>{5}, 50, 2, 1), InvalidInput);
}
