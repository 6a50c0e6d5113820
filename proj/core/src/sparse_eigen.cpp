#include "coca/sparse_eigen.hpp"

#include "coca/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace coca {

namespace {

void require_square(const Matrix& gamma) {
  if (gamma.rows() != gamma.cols() || gamma.rows() == 0) {
    throw InvalidInput("expected a nonempty square matrix");
  }
}

// Largest-magnitude entry positive; the lowest index wins among equal magnitudes.
void orient(Vector& v) {
  Eigen::Index arg = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (std::abs(v(i)) > std::abs(v(arg))) arg = i;
  }
  if (v.size() > 0 && v(arg) < 0.0) v = -v;
}

std::vector<std::size_t> support_of(const Vector& v) {
  std::vector<std::size_t> s;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) != 0.0) s.push_back(static_cast<std::size_t>(i));
  }
  return s;
}

SparseEigenResult finish(Vector v, const Matrix& gamma, int iterations, bool converged,
                         std::vector<double> trace) {
  orient(v);
  SparseEigenResult r;
  r.objective = v.dot(gamma * v);
  r.support = support_of(v);
  r.vector = std::move(v);
  r.iterations = iterations;
  r.converged = converged;
  r.objective_trace = std::move(trace);
  return r;
}

Vector soft_threshold(const Vector& a, double lambda) {
  return a.unaryExpr([lambda](double x) {
    const double m = std::abs(x) - lambda;
    return m > 0.0 ? std::copysign(m, x) : 0.0;
  });
}

// argmax_u u'a subject to ||u||_2 <= 1, ||u||_1 <= delta: a normalized soft
// threshold of a, with the threshold found by bisection.
Vector l1_ball_direction(const Vector& a, double delta, int steps) {
  const double norm = a.norm();
  if (!(norm > 0.0)) throw DegenerateIterate("PMD iterate fell into the null space");
  Vector u = a / norm;
  if (u.lpNorm<1>() <= delta) return u;

  double lo = 0.0;
  double hi = a.cwiseAbs().maxCoeff();
  for (int s = 0; s < steps; ++s) {
    const double mid = 0.5 * (lo + hi);
    const Vector st = soft_threshold(a, mid);
    const double l2 = st.norm();
    if (l2 == 0.0 || st.lpNorm<1>() / l2 <= delta) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  Vector st = soft_threshold(a, hi);
  if (st.norm() == 0.0) {
    // tied maxima with delta below sqrt(#ties): fall back to a single coordinate
    Eigen::Index arg = 0;
    a.cwiseAbs().maxCoeff(&arg);
    st = Vector::Zero(a.size());
    st(arg) = std::copysign(1.0, a(arg));
    return st;
  }
  return st / st.norm();
}

struct PowerRun {
  Vector v;
  int iterations = 0;
  bool converged = false;
  bool degenerate = false;
};

PowerRun power_run(const Matrix& gamma, Vector v, double tol, int max_iters) {
  PowerRun run;
  v.normalize();
  for (int it = 1; it <= max_iters; ++it) {
    run.iterations = it;
    Vector w = gamma * v;
    const double norm = w.norm();
    if (!(norm > 0.0)) {
      run.degenerate = true;
      break;
    }
    w /= norm;
    const double change = sign_aware_distance(w, v);
    v = std::move(w);
    if (change <= tol) {
      run.converged = true;
      break;
    }
  }
  run.v = std::move(v);
  return run;
}

}  // namespace

double sign_aware_distance(const Vector& a, const Vector& b) {
  return std::min((a - b).norm(), (a + b).norm());
}

Vector truncate(const Vector& v, std::span<const std::size_t> keep) {
  Vector out = Vector::Zero(v.size());
  for (std::size_t j : keep) {
    if (j >= static_cast<std::size_t>(v.size())) throw InvalidInput("truncation index out of range");
    out(static_cast<Eigen::Index>(j)) = v(static_cast<Eigen::Index>(j));
  }
  return out;
}

std::vector<std::size_t> top_k_indices(const Vector& v, std::size_t k) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(v.size()));
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  k = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      const double fa = std::abs(v(static_cast<Eigen::Index>(a)));
                      const double fb = std::abs(v(static_cast<Eigen::Index>(b)));
                      return fa > fb || (fa == fb && a < b);
                    });
  idx.resize(k);
  return idx;
}

double lq_norm_pow(const Vector& v, double q) {
  if (q == 0.0) return static_cast<double>((v.array() != 0.0).count());
  return v.cwiseAbs().array().pow(q).sum();
}

namespace {

// Normalized l_q^q of the top-k truncation for each k, from sorted magnitudes.
struct TruncationProfile {
  std::vector<double> lq;  // prefix sums of |x|^q
  std::vector<double> l2;  // prefix sums of x^2
  double q;

  TruncationProfile(const Vector& x, double q_) : q(q_) {
    const auto order = top_k_indices(x, static_cast<std::size_t>(x.size()));
    lq.reserve(order.size());
    l2.reserve(order.size());
    double a = 0.0, b = 0.0;
    for (std::size_t i : order) {
      const double m = std::abs(x(static_cast<Eigen::Index>(i)));
      a += std::pow(m, q);
      b += m * m;
      lq.push_back(a);
      l2.push_back(b);
    }
  }

  // k is 1-based
  [[nodiscard]] double value(std::size_t k) const {
    const double s2 = l2[k - 1];
    if (s2 == 0.0) return 0.0;
    return lq[k - 1] / std::pow(s2, 0.5 * q);
  }
};

void check_truncation_args(const Vector& x, double q, double radius) {
  if (!(q > 0.0 && q <= 1.0)) throw InvalidInput("truncation level search needs 0 < q <= 1");
  if (!(radius > 1.0)) throw InvalidRadius("R_q must exceed 1");
  if (x.size() == 0) throw InvalidInput("empty vector");
}

}  // namespace

std::size_t find_truncation_level(const Vector& x, double q, double radius) {
  check_truncation_args(x, q, radius);
  const TruncationProfile profile(x, q);
  const std::size_t d = static_cast<std::size_t>(x.size());
  if (profile.value(1) > radius) throw InvalidRadius("no truncation level satisfies the constraint");
  if (profile.value(d) <= radius) return d;
  // invariant: value(lo) <= radius < value(hi)
  std::size_t lo = 1, hi = d;
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (profile.value(mid) <= radius) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

double psd_shift(const Matrix& gamma) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gamma, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  return std::max(0.0, -eig.eigenvalues()(0)) * (1.0 + 1e-3);
}

PowerInitResult power_init(const Matrix& gamma, double tol, int max_iters) {
  require_square(gamma);
  const Eigen::Index d = gamma.rows();
  if (gamma.cwiseAbs().maxCoeff() == 0.0) throw InvalidInput("power_init on a zero matrix");

  const Vector ones = Vector::Ones(d);
  Vector perturbed(d);
  for (Eigen::Index i = 0; i < d; ++i) perturbed(i) = 1.0 + 0.5 * std::sin(1.7 * static_cast<double>(i + 1));

  const PowerRun a = power_run(gamma, ones, tol, max_iters);
  const PowerRun b = power_run(gamma, perturbed, tol, max_iters);

  PowerInitResult out;
  if (a.degenerate && b.degenerate) {
    out.vector = a.v;
    out.iterations = a.iterations + b.iterations;
    return out;
  }
  const auto rayleigh = [&](const Vector& v) { return v.dot(gamma * v); };
  const bool use_b = a.degenerate || (!b.degenerate && rayleigh(b.v) > rayleigh(a.v) + 1e-12);
  const PowerRun& chosen = use_b ? b : a;
  out.vector = chosen.v;
  orient(out.vector);
  out.iterations = a.iterations + b.iterations;
  const bool agree = a.degenerate || b.degenerate || sign_aware_distance(a.v, b.v) <= 1e-4;
  out.converged = chosen.converged && agree;
  return out;
}

SparseEigenResult qtpm(const Matrix& gamma, const SolverOptions& opts) {
  require_square(gamma);
  const std::size_t d = static_cast<std::size_t>(gamma.rows());
  if (!(opts.q >= 0.0 && opts.q <= 1.0)) throw InvalidInput("q must lie in [0, 1]");
  std::size_t k = d;
  if (opts.q == 0.0) {
    if (opts.radius < 1.0 || opts.radius != std::floor(opts.radius) ||
        opts.radius > static_cast<double>(d)) {
      throw InvalidRadius("q = 0 needs an integer k with 1 <= k <= d");
    }
    k = static_cast<std::size_t>(opts.radius);
  } else if (!(opts.radius > 1.0)) {
    throw InvalidRadius("R_q must exceed 1");
  }
  if (opts.shift < 0.0) throw InvalidInput("shift must be nonnegative");

  const double shift = opts.auto_shift ? psd_shift(gamma) : opts.shift;
  Matrix g = gamma;
  g.diagonal().array() += shift;

  Vector theta;
  switch (opts.init) {
    case InitKind::user:
      if (!opts.init_vector || opts.init_vector->size() != gamma.rows()) {
        throw InvalidVector("user initialization needs a d-vector");
      }
      theta = *opts.init_vector;
      break;
    case InitKind::power_method:
      theta = power_init(g).vector;
      break;
    case InitKind::spca:
      try {
        SpcaOptions so;
        theta = spca_leading(g, opts.init_spca_ridge, opts.init_spca_lasso, so).vector;
      } catch (const AllZeroSolution&) {
        theta = power_init(g).vector;
      } catch (const DegenerateIterate&) {
        theta = power_init(g).vector;
      }
      break;
  }
  if (!(theta.norm() > 0.0)) throw InvalidVector("initial vector is zero");
  theta.normalize();

  std::vector<double> trace;
  bool converged = false;
  int it = 0;
  while (it < opts.max_iters) {
    ++it;
    Vector x = g * theta;
    const double norm = x.norm();
    if (!(norm > 0.0)) throw DegenerateIterate("matrix-vector product vanished");
    x /= norm;

    Vector next;
    if (opts.q == 0.0) {
      next = k >= d ? x : truncate(x, top_k_indices(x, k));
    } else if (lq_norm_pow(x, opts.q) <= opts.radius) {
      next = x;
    } else {
      const std::size_t level = find_truncation_level(x, opts.q, opts.radius);
      next = truncate(x, top_k_indices(x, level));
    }
    next.normalize();
    trace.push_back(next.dot(gamma * next));

    const double change = sign_aware_distance(next, theta);
    theta = std::move(next);
    if (change <= opts.conv_tol) {
      converged = true;
      break;
    }
  }
  return finish(std::move(theta), gamma, it, converged, std::move(trace));
}

SparseEigenResult pmd_rank_one(const Matrix& gamma, double delta, const PmdOptions& opts) {
  require_square(gamma);
  if (!(delta >= 1.0)) throw InvalidRadius("PMD needs delta >= 1");

  Vector w = opts.init_vector ? *opts.init_vector : power_init(gamma).vector;
  if (w.size() != gamma.rows() || !(w.norm() > 0.0)) throw InvalidVector("bad PMD initial vector");
  w.normalize();

  std::vector<double> trace;
  bool converged = false;
  int it = 0;
  while (it < opts.max_iters) {
    ++it;
    const Vector v = l1_ball_direction(gamma * w, delta, opts.threshold_steps);
    Vector next = l1_ball_direction(gamma.transpose() * v, delta, opts.threshold_steps);
    trace.push_back(v.dot(gamma * next));
    const double change = sign_aware_distance(next, w);
    w = std::move(next);
    if (change <= opts.conv_tol) {
      converged = true;
      break;
    }
  }
  return finish(std::move(w), gamma, it, converged, std::move(trace));
}

Vector elastic_net_step(const Matrix& gamma, const Vector& v, double ridge, double lasso,
                        const Vector& warm, double tol, int max_sweeps, int* sweeps) {
  const Eigen::Index d = gamma.rows();
  const Vector gv = gamma * v;
  Vector w = warm;
  Vector gw = gamma * w;
  int sweep = 0;
  while (sweep < max_sweeps) {
    ++sweep;
    double largest_step = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      const double curvature = gamma(j, j) + ridge;
      if (!(curvature > 0.0)) throw NumericalError("elastic-net step needs a positive diagonal");
      const double c = gv(j) - gw(j) + gamma(j, j) * w(j);
      const double m = std::abs(c) - 0.5 * lasso;
      const double updated = m > 0.0 ? std::copysign(m, c) / curvature : 0.0;
      const double step = updated - w(j);
      if (step != 0.0) {
        gw += gamma.col(j) * step;
        w(j) = updated;
        largest_step = std::max(largest_step, std::abs(step));
      }
    }
    if (largest_step <= tol) break;
  }
  if (sweeps != nullptr) *sweeps = sweep;
  return w;
}

SparseEigenResult spca_leading(const Matrix& gamma, double delta1, double delta2,
                               const SpcaOptions& opts) {
  require_square(gamma);
  if (delta1 < 0.0 || delta2 < 0.0) throw InvalidInput("SPCA penalties must be nonnegative");
  Matrix g = gamma;
  g.diagonal().array() += opts.shift;

  Vector v = opts.init_vector ? *opts.init_vector : power_init(g).vector;
  if (v.size() != gamma.rows() || !(v.norm() > 0.0)) throw InvalidVector("bad SPCA initial vector");
  v.normalize();

  Vector w = Vector::Zero(gamma.rows());
  Vector direction = w;
  std::vector<double> trace;
  bool converged = false;
  int it = 0;
  while (it < opts.max_iters) {
    ++it;
    w = elastic_net_step(g, v, delta1, delta2, w, opts.cd_tol, opts.cd_max_sweeps);
    const double wn = w.norm();
    if (wn == 0.0) throw AllZeroSolution("lasso penalty shrank w to zero; reduce delta2");
    const Vector gw = g * w;
    const double gn = gw.norm();
    if (!(gn > 0.0)) throw DegenerateIterate("Gamma w vanished");
    v = gw / gn;

    Vector next = w / wn;
    trace.push_back(next.dot(gamma * next));
    const double change = it == 1 ? 2.0 : sign_aware_distance(next, direction);
    direction = std::move(next);
    if (change <= opts.conv_tol) {
      converged = true;
      break;
    }
  }
  return finish(std::move(direction), gamma, it, converged, std::move(trace));
}

Matrix deflate(const Matrix& gamma, const Vector& v) {
  require_square(gamma);
  if (v.size() != gamma.rows() || std::abs(v.norm() - 1.0) > 1e-10) {
    throw InvalidVector("deflation needs a unit vector of matching dimension");
  }
  const Vector gv = gamma * v;
  const double vgv = v.dot(gv);
  Matrix out = gamma - v * gv.transpose() - gv * v.transpose() + vgv * v * v.transpose();
  return 0.5 * (out + out.transpose());
}

std::string_view to_string(SparseMethod method) noexcept {
  switch (method) {
    case SparseMethod::qtpm: return "qtpm";
    case SparseMethod::pmd: return "pmd";
    case SparseMethod::spca: return "spca";
  }
  return "unknown";
}

std::vector<SparseEigenResult> top_m_eigenvectors(const Matrix& gamma, std::size_t m,
                                                  SparseMethod method,
                                                  std::span<const ComponentParams> params) {
  require_square(gamma);
  if (m == 0 || m > static_cast<std::size_t>(gamma.rows())) throw InvalidInput("need 1 <= m <= d");
  if (params.empty() || (params.size() != 1 && params.size() < m)) {
    throw InvalidInput("need one parameter set, or one per component");
  }
  std::vector<SparseEigenResult> out;
  Matrix current = gamma;
  for (std::size_t i = 0; i < m; ++i) {
    const ComponentParams& p = params.size() == 1 ? params[0] : params[i];
    SparseEigenResult r;
    switch (method) {
      case SparseMethod::qtpm: r = qtpm(current, p.qtpm); break;
      case SparseMethod::pmd: r = pmd_rank_one(current, p.pmd_delta, p.pmd); break;
      case SparseMethod::spca: r = spca_leading(current, p.spca_ridge, p.spca_lasso, p.spca); break;
    }
    if (i + 1 < m) current = deflate(current, r.vector);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace coca
