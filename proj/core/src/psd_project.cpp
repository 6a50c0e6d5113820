#include "coca/psd_project.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace coca {

namespace {

void require_symmetric(const Matrix& m) {
  if (m.rows() != m.cols()) throw InvalidInput("matrix must be square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InvalidInput("matrix must be symmetric");
  }
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

Matrix clip_unchecked(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(m));
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  const Vector clipped = eig.eigenvalues().cwiseMax(0.0);
  return symmetrized(eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose());
}

// Euclidean projection onto { x : sum |x_i| <= radius }.
Matrix project_l1_ball(const Matrix& v, double radius) {
  const double mass = v.cwiseAbs().sum();
  if (mass <= radius) return v;
  std::vector<double> mags(v.data(), v.data() + v.size());
  for (auto& m : mags) m = std::abs(m);
  std::sort(mags.begin(), mags.end(), std::greater<>());
  double cumulative = 0.0;
  double threshold = 0.0;
  for (std::size_t i = 0; i < mags.size(); ++i) {
    cumulative += mags[i];
    const double candidate = (cumulative - radius) / static_cast<double>(i + 1);
    if (mags[i] > candidate) threshold = candidate;
  }
  return v.unaryExpr([threshold](double x) {
    const double m = std::abs(x) - threshold;
    return m > 0.0 ? std::copysign(m, x) : 0.0;
  });
}

// prox of (1/rho) ||.||max at b, via Moreau: b - P_{l1 ball}(rho b) / rho.
Matrix prox_max_norm(const Matrix& b, double rho) { return b - project_l1_ball(rho * b, 1.0) / rho; }

}  // namespace

double max_norm_distance(const Matrix& a, const Matrix& b) {
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

double min_eigenvalue(const Matrix& symmetric) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetric, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  return eig.eigenvalues()(0);
}

Matrix clip_eigenvalues(const Matrix& symmetric) {
  require_symmetric(symmetric);
  return clip_unchecked(symmetric);
}

double dual_lower_bound(const Matrix& input, const Matrix& w) {
  const double mass = w.cwiseAbs().sum();
  if (!(mass > 0.0)) return 0.0;
  return std::max(0.0, -w.cwiseProduct(input).sum() / mass);
}

PsdProjectionResult project_psd_maxnorm(const Matrix& input, const PsdProjectionOptions& opts) {
  require_symmetric(input);
  PsdProjectionResult result;

  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(input));
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  const double lambda_min = eig.eigenvalues()(0);
  if (lambda_min >= -opts.eig_tol) {
    result.matrix = input;
    result.min_eigenvalue = lambda_min;
    result.converged = true;
    return result;
  }

  const Matrix r = symmetrized(input);
  const Eigen::Index d = r.rows();
  Matrix best = clip_unchecked(r);
  double upper = max_norm_distance(r, best);
  // the eigenvector of lambda_min is the first dual certificate
  const Vector v = eig.eigenvectors().col(0);
  double lower = std::min(upper, dual_lower_bound(r, v * v.transpose()));

  double rho = opts.initial_penalty;
  Matrix z = best;
  Matrix u = Matrix::Zero(d, d);
  int it = 0;
  while (upper - lower > opts.dist_tol && it < opts.max_iters) {
    ++it;
    const Matrix m = r - prox_max_norm(r - (z - u), rho);
    const Matrix shifted = m + u;
    const Matrix z_next = clip_unchecked(shifted);
    u = shifted - z_next;  // negative part of m + u, so -u is PSD

    const double primal_residual = (m - z_next).norm();
    const double dual_residual = rho * (z_next - z).norm();
    z = z_next;

    const double dist = max_norm_distance(r, z);
    if (dist < upper) {
      upper = dist;
      best = z;
    }
    lower = std::max(lower, std::min(upper, dual_lower_bound(r, -u)));
    result.trace.push_back({it, lower, upper});

    // residual balancing; u is the scaled dual, so it rescales with rho
    if (primal_residual > 10.0 * dual_residual) {
      rho *= 2.0;
      u /= 2.0;
    } else if (dual_residual > 10.0 * primal_residual) {
      rho /= 2.0;
      u *= 2.0;
    }
  }

  result.matrix = std::move(best);
  result.achieved_distance = max_norm_distance(r, result.matrix);
  result.min_eigenvalue = min_eigenvalue(result.matrix);
  result.lower_bound = lower;
  result.iterations = it;
  result.converged = upper - lower <= opts.dist_tol;
  if (!result.converged) {
    throw NotConverged("PSD projection bracket wider than dist_tol after max_iters", std::move(result));
  }
  return result;
}

PsdProjectionResult project_psd_maxnorm(const CorrelationEstimate& input,
                                        const PsdProjectionOptions& opts) {
  return project_psd_maxnorm(input.matrix, opts);
}

CorrelationEstimate as_estimate(const PsdProjectionResult& projected) {
  return {projected.matrix, CorrelationKind::psd_projected};
}

CovarianceEstimate scaled_covariance(const PsdProjectionResult& projected,
                                     const MarginalMoments& moments) {
  const auto& s = moments.stds;
  if (s.size() != projected.matrix.rows()) throw InvalidInput("moment dimension mismatch");
  for (Eigen::Index j = 0; j < s.size(); ++j) {
    if (!(s(j) > 0.0)) throw DegenerateColumn(static_cast<std::size_t>(j));
  }
  Matrix out = s.asDiagonal() * projected.matrix * s.asDiagonal();
  return {symmetrized(out), CovarianceKind::psd_projected};
}

}  // namespace coca
