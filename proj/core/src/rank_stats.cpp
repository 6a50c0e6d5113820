#include "coca/rank_stats.hpp"

#include "coca/error.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace coca {

DataMatrix::DataMatrix(Matrix values) : values_(std::move(values)) {
  if (!values_.allFinite()) {
    throw InvalidData("data matrix contains a non-finite entry");
  }
}

std::string_view to_string(CorrelationKind kind) noexcept {
  switch (kind) {
    case CorrelationKind::pearson: return "pearson";
    case CorrelationKind::spearman_raw: return "spearman-raw";
    case CorrelationKind::spearman_sine: return "spearman-sine";
    case CorrelationKind::psd_projected: return "psd-projected";
  }
  return "unknown";
}

std::string_view to_string(CovarianceKind kind) noexcept {
  switch (kind) {
    case CovarianceKind::pearson: return "pearson";
    case CovarianceKind::spearman_sine: return "spearman-sine";
    case CovarianceKind::psd_projected: return "psd-projected";
  }
  return "unknown";
}

bool MarginalMoments::any_constant() const noexcept {
  return std::find(constant.begin(), constant.end(), true) != constant.end();
}

std::vector<double> compute_ranks(std::span<const double> column) {
  const std::size_t n = column.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (double x : column) {
    if (!std::isfinite(x)) throw InvalidData("non-finite entry in rank input");
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return column[a] < column[b]; });

  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && column[order[j]] == column[order[i]]) ++j;
    // positions i..j-1 hold ranks i+1..j
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = midrank;
    i = j;
  }
  return ranks;
}

Matrix rank_matrix(const DataMatrix& data) {
  Matrix ranks(data.values().rows(), data.values().cols());
  std::vector<double> buffer(data.n());
  for (std::size_t j = 0; j < data.d(); ++j) {
    const auto col = data.column(j);
    std::copy(col.begin(), col.end(), buffer.begin());
    const auto r = compute_ranks(buffer);
    std::copy(r.begin(), r.end(), ranks.col(static_cast<Eigen::Index>(j)).begin());
  }
  return ranks;
}

MarginalMoments marginal_moments(const DataMatrix& data) {
  if (data.n() < 2) throw InvalidDimension("marginal moments need n >= 2");
  const auto& x = data.values();
  const double n = static_cast<double>(data.n());
  MarginalMoments m;
  m.means = x.colwise().sum().transpose() / n;
  m.stds.resize(x.cols());
  m.constant.assign(data.d(), false);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double ss = (x.col(j).array() - m.means(j)).square().sum();
    m.stds(j) = std::sqrt(ss / n);
    const bool all_equal = (x.col(j).array() == x(0, j)).all();
    m.constant[static_cast<std::size_t>(j)] = all_equal;
    if (all_equal) m.stds(j) = 0.0;
  }
  return m;
}

namespace {

// Correlation of already-centered columns. Each entry is an independent
// sequential dot product, so the result does not depend on evaluation order.
Matrix centered_correlation(const Matrix& centered) {
  const Eigen::Index d = centered.cols();
  Vector norms(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double ss = centered.col(j).squaredNorm();
    if (!(ss > 0.0)) throw DegenerateColumn(static_cast<std::size_t>(j));
    norms(j) = std::sqrt(ss);
  }
  Matrix out = Matrix::Identity(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index k = j + 1; k < d; ++k) {
      double c = centered.col(j).dot(centered.col(k)) / (norms(j) * norms(k));
      c = std::clamp(c, -1.0, 1.0);
      out(j, k) = c;
      out(k, j) = c;
    }
  }
  return out;
}

}  // namespace

CorrelationEstimate spearman_rho_matrix(const DataMatrix& data) {
  if (data.n() < 3) throw InvalidDimension("Spearman's rho needs n >= 3");
  Matrix ranks = rank_matrix(data);
  const double mean_rank = 0.5 * static_cast<double>(data.n() + 1);
  ranks.array() -= mean_rank;
  return {centered_correlation(ranks), CorrelationKind::spearman_raw};
}

CorrelationEstimate sine_transform(const CorrelationEstimate& rho) {
  if (rho.kind != CorrelationKind::spearman_raw) {
    throw InvalidInput("sine transform expects a spearman-raw estimate");
  }
  const Eigen::Index d = rho.matrix.rows();
  Matrix out(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index k = 0; k < d; ++k) {
      out(j, k) = j == k ? 1.0 : 2.0 * std::sin(std::numbers::pi / 6.0 * rho.matrix(j, k));
    }
  }
  return {std::move(out), CorrelationKind::spearman_sine};
}

CorrelationEstimate spearman_sine_matrix(const DataMatrix& data) {
  return sine_transform(spearman_rho_matrix(data));
}

CovarianceEstimate spearman_covariance(const DataMatrix& data) {
  const auto r = spearman_sine_matrix(data);
  const auto moments = marginal_moments(data);
  const auto& s = moments.stds;
  Matrix out = s.asDiagonal() * r.matrix * s.asDiagonal();
  for (Eigen::Index j = 0; j < out.rows(); ++j) out(j, j) = s(j) * s(j);
  return {std::move(out), CovarianceKind::spearman_sine};
}

CorrelationEstimate pearson_correlation(const DataMatrix& data) {
  if (data.n() < 2) throw InvalidDimension("Pearson correlation needs n >= 2");
  Matrix centered = data.values();
  centered.rowwise() -= centered.colwise().mean();
  return {centered_correlation(centered), CorrelationKind::pearson};
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidInput("normal quantile needs 0 < p < 1");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

DataMatrix normal_scores(const DataMatrix& data) {
  if (data.n() < 2) throw InvalidDimension("normal scores need n >= 2");
  const Matrix ranks = rank_matrix(data);
  const double denom = static_cast<double>(data.n() + 1);
  return DataMatrix(ranks.unaryExpr([denom](double r) { return normal_quantile(r / denom); }));
}

}  // namespace coca
