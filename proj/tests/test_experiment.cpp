#include "coca/error.hpp"
#include "coca/experiment.hpp"
#include "coca/nonparanormal.hpp"
#include "coca/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace coca;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.n = 60;
  c.d = 30;
  c.s = 10;
  c.replicates = 2;
  c.methods = {Method::tpower, Method::pmd};
  c.grids = TuningGrids::defaults(30);
  c.grids.tpower_k = {5, 10, 15};
  c.grids.pmd_delta = {1.5, 2.5, 3.5};
  c.threads = 1;
  return c;
}

}  // namespace

TEST_CASE("enum names round-trip") {
  for (auto m : {Method::pmd, Method::spca, Method::tpower, Method::qtpm}) {
    Method back{};
    CHECK(parse(to_string(m), back));
    CHECK(back == m);
  }
  for (auto e : {Estimator::pearson, Estimator::spearman, Estimator::oracle}) {
    Estimator back{};
    CHECK(parse(to_string(e), back));
    CHECK(back == e);
  }
  for (auto p : {SpearmanPsd::projected, SpearmanPsd::shifted, SpearmanPsd::raw}) {
    SpearmanPsd back{};
    CHECK(parse(to_string(p), back));
    CHECK(back == p);
  }
  Method m{};
  CHECK_FALSE(parse("lasso", m));
}

TEST_CASE("grids") {
  const auto g = log_grid(1, 100, 3);
  REQUIRE(g.size() == 3);
  CHECK(g[0] == 1);
  CHECK(g[1] == doctest::Approx(10));
  CHECK(g[2] == 100);

  const auto t = TuningGrids::defaults(100);
  CHECK(t.tpower_k.size() == 20);
  CHECK(t.tpower_k.front() == 2);
  CHECK(t.tpower_k.back() == 40);
  CHECK(t.pmd_delta.size() == 20);
  CHECK(t.pmd_delta.back() == doctest::Approx(10));
  CHECK(t.spca_lasso.front() == doctest::Approx(0.01));
  CHECK(t.spca_ridge == 1e-4);
  CHECK(t.qtpm_radius.back() == doctest::Approx(std::pow(100.0, 0.75)));
  CHECK(&t.for_method(Method::pmd) == &t.pmd_delta);

  CHECK(sparsity_of(Method::tpower) == Sparsity::smaller_is_sparser);
  CHECK(sparsity_of(Method::pmd) == Sparsity::smaller_is_sparser);
  CHECK(sparsity_of(Method::spca) == Sparsity::larger_is_sparser);
}

TEST_CASE("config validation names the field") {
  auto c = small_config();
  CHECK_NOTHROW(c.validate());
  const auto message_of = [](const ExperimentConfig& bad) {
    try {
      bad.validate();
    } catch (const InvalidInput& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  c.scheme = 3;
  CHECK(message_of(c).rfind("scheme", 0) == 0);
  c = small_config();
  c.r = 1.0;
  CHECK(message_of(c).rfind("r", 0) == 0);
  c = small_config();
  c.d = 15;
  CHECK(message_of(c).rfind("d", 0) == 0);
  c = small_config();
  c.methods.clear();
  CHECK(message_of(c).rfind("methods", 0) == 0);
  c = small_config();
  c.grids.pmd_delta = {0.5};
  CHECK(message_of(c).find("pmd") != std::string::npos);
}

TEST_CASE("two replicates aggregate to the hand-computed mean and sd") {
  const auto c = small_config();
  const auto res = replicate_experiment(c);
  REQUIRE(res.cells.size() == 6);

  const auto model = synthesize_model(c.d, c.s);
  const auto transforms = scheme_transforms(c.scheme, c.d);
  std::vector<std::vector<double>> best(6);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto seed = derive_seed(c.base_seed, i);
    CHECK(res.replicate_seeds[i] == seed);
    const auto sample = sample_nonparanormal(model.sigma0, transforms, c.n, derive_seed(seed, 0));
    std::size_t cell = 0;
    for (auto e : c.estimators) {
      const Matrix gamma = estimator_matrix(e, sample.x, sample.latent, c.spearman_psd);
      for (auto m : c.methods) {
        const auto o = solve_path(gamma, m, c.grids, model.theta1);
        REQUIRE(o.usable);
        best[cell++].push_back(o.best_sin_angle);
      }
    }
  }
  for (std::size_t k = 0; k < 6; ++k) {
    const double a = best[k][0], b = best[k][1];
    CHECK(res.cells[k].sin_angle.mean == doctest::Approx((a + b) / 2).epsilon(1e-15));
    CHECK(res.cells[k].sin_angle.sd == doctest::Approx(std::abs(a - b) / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(res.cells[k].replicates == 2);
    CHECK(res.cells[k].excluded == 0);
  }
  CHECK(res.roc.size() == 6);
}

TEST_CASE("results do not depend on the thread count") {
  auto c = small_config();
  c.replicates = 5;
  c.r = 0.05;
  c.scheme = 2;
  const auto serial = replicate_experiment(c);
  c.threads = 3;
  const auto parallel = replicate_experiment(c);
  REQUIRE(serial.cells.size() == parallel.cells.size());
  for (std::size_t k = 0; k < serial.cells.size(); ++k) {
    CHECK(serial.cells[k].sin_angle.mean == parallel.cells[k].sin_angle.mean);
    CHECK(serial.cells[k].sin_angle.sd == parallel.cells[k].sin_angle.sd);
  }
  for (const auto& [key, curve] : serial.roc) CHECK(curve.auc == parallel.roc.at(key).auc);
}

TEST_CASE("Spearman path is invariant to column scaling and monotone maps") {
  const auto model = synthesize_model(30, 10);
  const auto sample = sample_nonparanormal(model.sigma0, linear_transforms(30), 80, 4);
  Matrix scaled = sample.x.values();
  Matrix warped = sample.x.values();
  for (Eigen::Index j = 0; j < scaled.cols(); ++j) {
    scaled.col(j) *= 0.5 + j;
    warped.col(j) = warped.col(j).array().exp();
  }
  const auto grids = small_config().grids;
  for (auto m : {Method::tpower, Method::pmd}) {
    const Matrix base = estimator_matrix(Estimator::spearman, sample.x, sample.latent, SpearmanPsd::projected);
    const Matrix s = estimator_matrix(Estimator::spearman, DataMatrix(scaled), sample.latent, SpearmanPsd::projected);
    const Matrix w = estimator_matrix(Estimator::spearman, DataMatrix(warped), sample.latent, SpearmanPsd::projected);
    CHECK(base == s);
    CHECK(base == w);
    const auto a = solve_path(base, m, grids, model.theta1);
    const auto b = solve_path(s, m, grids, model.theta1);
    CHECK(a.sin_angles == b.sin_angles);
    CHECK(a.best_delta == b.best_delta);
  }
  // Pearson correlation is scale-free too; exact equality is not expected
  // because rescaling changes rounding
  const Matrix p0 = estimator_matrix(Estimator::pearson, sample.x, sample.latent, SpearmanPsd::projected);
  const Matrix p1 = estimator_matrix(Estimator::pearson, DataMatrix(scaled), sample.latent, SpearmanPsd::projected);
  CHECK((p0 - p1).cwiseAbs().maxCoeff() <= 1e-12);
}
