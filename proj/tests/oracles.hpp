#pragma once
// Independent reference implementations used only by the tests. None of
// these call into the library code path they check.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// O(n^2) fractional rank: 1 + #smaller + (#equal - 1) / 2.
inline std::vector<double> brute_ranks(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double smaller = 0, equal = 0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (x[j] < x[i]) smaller += 1;
      if (x[j] == x[i]) equal += 1;
    }
    r[i] = 1 + smaller + (equal - 1) / 2;
  }
  return r;
}

inline std::vector<double> column(const MatrixXd& m, Eigen::Index j) {
  return std::vector<double>(m.col(j).data(), m.col(j).data() + m.rows());
}

// Textbook formula: sum (a - abar)(b - bbar) / sqrt(sum (a - abar)^2 sum (b - bbar)^2).
inline double brute_correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

inline MatrixXd brute_pearson(const MatrixXd& x) {
  const auto d = x.cols();
  MatrixXd out(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index k = 0; k < d; ++k)
      out(j, k) = j == k ? 1.0 : brute_correlation(column(x, j), column(x, k));
  return out;
}

// Spearman with rbar = (n + 1) / 2 as in the rank formula.
inline MatrixXd brute_spearman(const MatrixXd& x) {
  const auto d = x.cols();
  const double rbar = (static_cast<double>(x.rows()) + 1) / 2;
  std::vector<std::vector<double>> ranks;
  for (Eigen::Index j = 0; j < d; ++j) ranks.push_back(brute_ranks(column(x, j)));
  MatrixXd out(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index k = 0; k < d; ++k) {
      if (j == k) {
        out(j, k) = 1.0;
        continue;
      }
      double num = 0, dj = 0, dk = 0;
      for (std::size_t i = 0; i < ranks[j].size(); ++i) {
        num += (ranks[j][i] - rbar) * (ranks[k][i] - rbar);
        dj += (ranks[j][i] - rbar) * (ranks[j][i] - rbar);
        dk += (ranks[k][i] - rbar) * (ranks[k][i] - rbar);
      }
      out(j, k) = num / std::sqrt(dj * dk);
    }
  }
  return out;
}

// Standard normal quantile by bisection on the erfc-based CDF.
inline double normal_quantile(double p) {
  double lo = -40, hi = 40;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (0.5 * std::erfc(-mid / std::sqrt(2.0)) < p) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Minimizes max(|1 - a|, |r - b|, |1 - c|) over PSD [[a, b], [b, c]] by
// grid search; PSD iff a, c >= 0 and b^2 <= ac. Returns the optimal t.
inline double psd_2x2_grid(double diag, double off, double step = 1e-3) {
  double best = std::numeric_limits<double>::infinity();
  for (double a = diag - 0.3; a <= diag + 0.3; a += step) {
    for (double c = diag - 0.3; c <= diag + 0.3; c += step) {
      if (a < 0 || c < 0) continue;
      // for fixed diagonal the best feasible off-diagonal is the clamp of off
      const double bmax = std::sqrt(a * c);
      const double b = std::clamp(off, -bmax, bmax);
      best = std::min(best, std::max({std::abs(diag - a), std::abs(off - b), std::abs(diag - c)}));
    }
  }
  return best;
}

// Linear scan for the largest k whose normalized top-k truncation has
// ||.||_q^q <= R, computed from scratch for each k.
inline std::size_t truncation_level_scan(const VectorXd& x, double q, double radius) {
  std::vector<double> mags(x.data(), x.data() + x.size());
  for (auto& m : mags) m = std::abs(m);
  std::stable_sort(mags.begin(), mags.end(), std::greater<>());
  std::size_t best = 0;
  for (std::size_t k = 1; k <= mags.size(); ++k) {
    double l2 = 0;
    for (std::size_t i = 0; i < k; ++i) l2 += mags[i] * mags[i];
    double lq = 0;
    for (std::size_t i = 0; i < k; ++i) lq += std::pow(mags[i] / std::sqrt(l2), q);
    if (lq <= radius) best = k;
  }
  return best;
}

// Zooming grid search for min f over a box; f is convex, so repeated
// refinement around the incumbent converges to the global minimum.
inline VectorXd zoom_grid_minimize(const std::function<double(const VectorXd&)>& f, VectorXd center,
                                   double half_width, int points_per_dim, int levels) {
  const auto dim = center.size();
  for (int level = 0; level < levels; ++level) {
    VectorXd best = center;
    double best_val = f(center);
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    const double step = 2 * half_width / (points_per_dim - 1);
    while (true) {
      VectorXd p(dim);
      for (Eigen::Index i = 0; i < dim; ++i) p(i) = center(i) - half_width + step * idx[static_cast<std::size_t>(i)];
      const double v = f(p);
      if (v < best_val) {
        best_val = v;
        best = p;
      }
      std::size_t i = 0;
      while (i < idx.size() && ++idx[i] == points_per_dim) idx[i++] = 0;
      if (i == idx.size()) break;
    }
    center = best;
    half_width = step;
  }
  return center;
}

inline MatrixXd random_symmetric(std::mt19937_64& rng, Eigen::Index d) {
  std::normal_distribution<double> g;
  MatrixXd a(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = g(rng);
  return 0.5 * (a + a.transpose());
}

inline MatrixXd random_psd(std::mt19937_64& rng, Eigen::Index d) {
  std::normal_distribution<double> g;
  MatrixXd a(d + 3, d);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = g(rng);
  return a.transpose() * a / static_cast<double>(a.rows());
}

inline VectorXd random_unit(std::mt19937_64& rng, Eigen::Index d) {
  std::normal_distribution<double> g;
  VectorXd v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = g(rng);
  return v.normalized();
}

inline MatrixXd random_data(std::mt19937_64& rng, Eigen::Index n, Eigen::Index d) {
  std::normal_distribution<double> g;
  MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = g(rng);
  return x;
}

// Random symmetric matrix with unit diagonal and entries 2 sin(pi u / 6),
// u uniform on [-1, 1]; redrawn until indefinite.
inline MatrixXd random_indefinite_sine(std::mt19937_64& rng, Eigen::Index d) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  while (true) {
    MatrixXd m = MatrixXd::Identity(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = i + 1; j < d; ++j) m(i, j) = m(j, i) = 2 * std::sin(M_PI * u(rng) / 6);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(m, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues()(0) < -1e-3) return m;
  }
}

// Leading eigenvector by dense eigendecomposition.
inline VectorXd leading_eigenvector(const MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(m);
  return eig.eigenvectors().col(m.rows() - 1);
}

inline double sin_angle(const VectorXd& a, const VectorXd& b) {
  const double c = a.normalized().dot(b.normalized());
  return std::sqrt(std::max(0.0, 1 - c * c));
}

}  // namespace oracle
