#include "coca/experiment.hpp"

#include "coca/error.hpp"
#include "coca/nonparanormal.hpp"
#include "coca/psd_project.hpp"
#include "coca/rank_stats.hpp"
#include "coca/rng.hpp"
#include "parallel.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace coca {

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::pmd: return "pmd";
    case Method::spca: return "spca";
    case Method::tpower: return "tpower";
    case Method::qtpm: return "qtpm";
  }
  return "unknown";
}

std::string_view to_string(Estimator e) noexcept {
  switch (e) {
    case Estimator::pearson: return "pearson";
    case Estimator::spearman: return "spearman";
    case Estimator::oracle: return "oracle";
  }
  return "unknown";
}

std::string_view to_string(SpearmanPsd p) noexcept {
  switch (p) {
    case SpearmanPsd::projected: return "projected";
    case SpearmanPsd::shifted: return "shifted";
    case SpearmanPsd::raw: return "raw";
  }
  return "unknown";
}

bool parse(std::string_view text, Method& out) noexcept {
  for (Method m : {Method::pmd, Method::spca, Method::tpower, Method::qtpm}) {
    if (to_string(m) == text) {
      out = m;
      return true;
    }
  }
  return false;
}

bool parse(std::string_view text, Estimator& out) noexcept {
  for (Estimator e : {Estimator::pearson, Estimator::spearman, Estimator::oracle}) {
    if (to_string(e) == text) {
      out = e;
      return true;
    }
  }
  return false;
}

bool parse(std::string_view text, SpearmanPsd& out) noexcept {
  for (SpearmanPsd p : {SpearmanPsd::projected, SpearmanPsd::shifted, SpearmanPsd::raw}) {
    if (to_string(p) == text) {
      out = p;
      return true;
    }
  }
  return false;
}

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0 && hi >= lo) || count == 0) throw InvalidInput("log grid needs 0 < lo <= hi and count > 0");
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

TuningGrids TuningGrids::defaults(std::size_t d, double q) {
  TuningGrids g;
  for (int k = 2; k <= 40 && k <= static_cast<int>(d); k += 2) g.tpower_k.push_back(k);
  const double dd = static_cast<double>(d);
  g.pmd_delta = log_grid(1.0, std::sqrt(dd), 20);
  g.spca_lasso = log_grid(0.01, 2.0, 20);
  g.qtpm_q = q;
  g.qtpm_radius = log_grid(1.5, std::max(1.5, std::pow(dd, 1.0 - q / 2.0)), 20);
  return g;
}

const std::vector<double>& TuningGrids::for_method(Method m) const {
  switch (m) {
    case Method::pmd: return pmd_delta;
    case Method::spca: return spca_lasso;
    case Method::tpower: return tpower_k;
    case Method::qtpm: return qtpm_radius;
  }
  return tpower_k;
}

void ExperimentConfig::validate() const {
  const auto fail = [](const std::string& field, const std::string& why) {
    throw InvalidInput(field + ": " + why);
  };
  if (scheme != 1 && scheme != 2) fail("scheme", "must be 1 or 2");
  if (n < 3) fail("n", "must be at least 3");
  if (s == 0) fail("s", "must be positive");
  if (d < 2 * s) fail("d", "must be at least 2s");
  if (!(r >= 0.0 && r < 1.0)) fail("r", "must lie in [0, 1)");
  if (methods.empty()) fail("methods", "must not be empty");
  if (estimators.empty()) fail("estimators", "must not be empty");
  if (replicates == 0) fail("replicates", "must be positive");
  for (Method m : methods) {
    const auto& grid = grids.for_method(m);
    const std::string field = "grids." + std::string(to_string(m));
    if (grid.empty()) fail(field, "must not be empty");
    for (double v : grid) {
      if (!std::isfinite(v)) fail(field, "values must be finite");
      switch (m) {
        case Method::tpower:
          if (v < 1.0 || v > static_cast<double>(d) || v != std::floor(v)) fail(field, "k must be an integer in [1, d]");
          break;
        case Method::qtpm:
          if (!(v > 1.0)) fail(field, "R_q must exceed 1");
          break;
        case Method::pmd:
          if (v < 1.0) fail(field, "delta must be at least 1");
          break;
        case Method::spca:
          if (v < 0.0) fail(field, "lasso penalty must be nonnegative");
          break;
      }
    }
  }
  if (!(grids.qtpm_q > 0.0 && grids.qtpm_q <= 1.0)) fail("grids.qtpm_q", "must lie in (0, 1]");
  if (grids.spca_ridge < 0.0) fail("grids.spca_ridge", "must be nonnegative");
}

Sparsity sparsity_of(Method m) noexcept {
  return m == Method::spca ? Sparsity::larger_is_sparser : Sparsity::smaller_is_sparser;
}

Matrix estimator_matrix(Estimator e, const DataMatrix& observed, const DataMatrix& latent,
                        SpearmanPsd psd, bool* psd_fallback) {
  if (psd_fallback != nullptr) *psd_fallback = false;
  switch (e) {
    case Estimator::pearson: return pearson_correlation(observed).matrix;
    case Estimator::oracle: return pearson_correlation(latent).matrix;
    case Estimator::spearman: break;
  }
  Matrix r = spearman_sine_matrix(observed).matrix;
  switch (psd) {
    case SpearmanPsd::raw: return r;
    case SpearmanPsd::shifted: {
      r.diagonal().array() += psd_shift(r);
      return r;
    }
    case SpearmanPsd::projected:
      try {
        return project_psd_maxnorm(r).matrix;
      } catch (const NotConverged& nc) {
        if (psd_fallback != nullptr) *psd_fallback = true;
        return nc.best().matrix;
      }
  }
  return r;
}

ReplicateOutcome solve_path(const Matrix& gamma, Method method, const TuningGrids& grids,
                            const Vector& theta1) {
  const auto& grid = grids.for_method(method);
  ReplicateOutcome out;
  out.path.reserve(grid.size());
  out.sin_angles.reserve(grid.size());

  // one initializer per matrix, shared by every grid value
  Vector init;
  if (method == Method::tpower || method == Method::qtpm) {
    try {
      init = spca_leading(gamma, 1e-4, 0.0).vector;
    } catch (const Error&) {
      init = power_init(gamma).vector;
    }
  } else {
    init = power_init(gamma).vector;
  }

  const Vector empty = Vector::Zero(theta1.size());
  std::vector<PathPoint> successes;
  std::vector<Vector> vectors(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double delta = grid[g];
    try {
      SparseEigenResult res;
      switch (method) {
        case Method::tpower:
        case Method::qtpm: {
          SolverOptions opts;
          opts.q = method == Method::tpower ? 0.0 : grids.qtpm_q;
          opts.radius = delta;
          opts.init = InitKind::user;
          opts.init_vector = init;
          res = qtpm(gamma, opts);
          break;
        }
        case Method::pmd: {
          PmdOptions opts;
          opts.init_vector = init;
          res = pmd_rank_one(gamma, delta, opts);
          break;
        }
        case Method::spca: {
          SpcaOptions opts;
          opts.init_vector = init;
          res = spca_leading(gamma, grids.spca_ridge, delta, opts);
          break;
        }
      }
      if (!res.converged) ++out.unconverged;
      PathPoint p{delta, support_metrics(theta1, res.vector)};
      out.path.push_back(p);
      successes.push_back(p);
      out.sin_angles.push_back(sin_angle(theta1, res.vector));
      vectors[g] = std::move(res.vector);
    } catch (const Error&) {
      ++out.failed;
      out.path.push_back({delta, support_metrics(theta1, empty)});
      out.sin_angles.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }

  if (!successes.empty()) {
    out.usable = true;
    out.best_delta = oracle_delta(successes, sparsity_of(method));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (grid[i] == out.best_delta && !std::isnan(out.sin_angles[i])) {
        out.best_sin_angle = out.sin_angles[i];
        out.best_vector = vectors[i];
        break;
      }
    }
  }
  return out;
}

ExperimentResult replicate_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto model = synthesize_model(config.d, config.s);
  const auto transforms = scheme_transforms(config.scheme, config.d);
  const ContaminationSpec contamination{config.r, config.magnitude};

  const std::size_t ne = config.estimators.size();
  const std::size_t nm = config.methods.size();
  struct Replicate {
    std::vector<ReplicateOutcome> outcomes;  // estimator-major
    bool psd_fallback = false;
  };
  std::vector<Replicate> replicates(config.replicates);
  ExperimentResult result;
  result.config = config;
  result.replicate_seeds.resize(config.replicates);
  for (std::size_t i = 0; i < config.replicates; ++i) {
    result.replicate_seeds[i] = derive_seed(config.base_seed, i);
  }

  detail::parallel_for(config.replicates, config.threads, [&](std::size_t i) {
    const std::uint64_t seed = result.replicate_seeds[i];
    const auto sample = sample_nonparanormal(model.sigma0, transforms, config.n, derive_seed(seed, 0));
    const auto observed = contaminate(sample.x, contamination, derive_seed(seed, 1)).data;
    Replicate& rep = replicates[i];
    rep.outcomes.reserve(ne * nm);
    for (Estimator e : config.estimators) {
      bool fallback = false;
      const Matrix gamma = estimator_matrix(e, observed, sample.latent, config.spearman_psd, &fallback);
      rep.psd_fallback = rep.psd_fallback || fallback;
      for (Method m : config.methods) rep.outcomes.push_back(solve_path(gamma, m, config.grids, model.theta1));
    }
  });

  for (const auto& rep : replicates) result.psd_not_converged += rep.psd_fallback ? 1 : 0;
  for (std::size_t ei = 0; ei < ne; ++ei) {
    for (std::size_t mi = 0; mi < nm; ++mi) {
      const CellKey key{config.methods[mi], config.estimators[ei], config.scheme, config.n, config.r};
      ReplicationSummary cell;
      cell.key = key;
      cell.replicates = config.replicates;
      std::vector<double> angles, deltas;
      std::vector<PathPoint> points;
      for (const auto& rep : replicates) {
        const auto& o = rep.outcomes[ei * nm + mi];
        cell.failed_points += o.failed;
        cell.unconverged_points += o.unconverged;
        points.insert(points.end(), o.path.begin(), o.path.end());
        if (!o.usable) {
          ++cell.excluded;
          continue;
        }
        angles.push_back(o.best_sin_angle);
        deltas.push_back(o.best_delta);
      }
      cell.sin_angle = mean_sd(angles);
      cell.oracle_delta = mean_sd(deltas);
      result.cells.push_back(cell);
      if (config.grids.for_method(key.method).size() >= 2) result.roc.emplace(key, roc_curve(points));
    }
  }
  return result;
}

}  // namespace coca
