#include "coca/evalkit.hpp"

#include "coca/error.hpp"
#include "coca/nonparanormal.hpp"
#include "coca/psd_project.hpp"
#include "coca/rank_stats.hpp"
#include "coca/rng.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace coca {

double sin_angle(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw InvalidVector("sin_angle needs vectors of equal length");
  if (std::abs(a.norm() - 1.0) > 1e-8 || std::abs(b.norm() - 1.0) > 1e-8) {
    throw InvalidVector("sin_angle needs unit vectors");
  }
  // |a - b| |a + b| / 2 = 2 sin(t/2) cos(t/2); exact zero for a = +-b,
  // where 1 - (a'b)^2 would leave a rounding residue of order 1e-8
  return std::clamp(0.5 * (a - b).norm() * (a + b).norm(), 0.0, 1.0);
}

SupportMetrics support_metrics(std::span<const std::size_t> truth,
                               std::span<const std::size_t> estimate, std::size_t d) {
  if (truth.empty() || truth.size() >= d) throw InvalidInput("need 0 < s < d");
  std::vector<bool> in_truth(d, false), in_estimate(d, false);
  for (std::size_t j : truth) in_truth.at(j) = true;
  for (std::size_t j : estimate) in_estimate.at(j) = true;
  SupportMetrics m;
  for (std::size_t j = 0; j < d; ++j) {
    if (in_estimate[j] && !in_truth[j]) ++m.fpn;
    if (in_truth[j] && !in_estimate[j]) ++m.fnn;
  }
  const std::size_t s = truth.size();
  m.fpr = static_cast<double>(m.fpn) / static_cast<double>(d - s);
  m.fnr = static_cast<double>(m.fnn) / static_cast<double>(s);
  return m;
}

SupportMetrics support_metrics(const Vector& truth, const Vector& estimate) {
  if (truth.size() != estimate.size()) throw InvalidInput("support metrics need equal lengths");
  std::vector<std::size_t> t, e;
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    if (truth(i) != 0.0) t.push_back(static_cast<std::size_t>(i));
    if (estimate(i) != 0.0) e.push_back(static_cast<std::size_t>(i));
  }
  return support_metrics(t, e, static_cast<std::size_t>(truth.size()));
}

RocCurve roc_curve(std::span<const PathPoint> results) {
  if (results.empty()) throw InvalidInput("ROC curve needs at least one path point");
  struct Sum {
    double fpr = 0.0, tpr = 0.0;
    std::size_t count = 0;
  };
  std::map<double, Sum> by_delta;
  for (const auto& p : results) {
    auto& s = by_delta[p.delta];
    s.fpr += p.metrics.fpr;
    s.tpr += 1.0 - p.metrics.fnr;
    ++s.count;
  }
  if (by_delta.size() < 2) throw InvalidInput("ROC curve needs at least two distinct deltas");

  RocCurve curve;
  for (const auto& [delta, s] : by_delta) {
    const double c = static_cast<double>(s.count);
    curve.points.push_back({delta, s.fpr / c, s.tpr / c, s.count});
  }
  std::stable_sort(curve.points.begin(), curve.points.end(), [](const RocPoint& a, const RocPoint& b) {
    return a.fpr < b.fpr || (a.fpr == b.fpr && a.tpr < b.tpr);
  });
  curve.fpr_min = curve.points.front().fpr;
  curve.fpr_max = curve.points.back().fpr;
  curve.degenerate = !(curve.fpr_max > curve.fpr_min);
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto& a = curve.points[i - 1];
    const auto& b = curve.points[i];
    curve.auc += 0.5 * (b.fpr - a.fpr) * (a.tpr + b.tpr);
  }
  return curve;
}

double partial_auc(const RocCurve& curve, double lo, double hi) {
  if (curve.points.empty() || !(hi > lo)) return 0.0;
  const auto& pts = curve.points;
  // upper envelope at equal fpr: the last point at a given fpr has the largest tpr
  const auto tpr_at = [&](double x) {
    if (x <= pts.front().fpr) return pts.front().tpr;
    if (x >= pts.back().fpr) return pts.back().tpr;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      if (pts[i].fpr >= x) {
        const auto& a = pts[i - 1];
        const auto& b = pts[i];
        if (b.fpr == a.fpr) return b.tpr;
        return a.tpr + (b.tpr - a.tpr) * (x - a.fpr) / (b.fpr - a.fpr);
      }
    }
    return pts.back().tpr;
  };
  lo = std::max(lo, curve.fpr_min);
  hi = std::min(hi, curve.fpr_max);
  if (!(hi > lo)) return 0.0;
  std::vector<double> xs{lo};
  for (const auto& p : pts) {
    if (p.fpr > lo && p.fpr < hi) xs.push_back(p.fpr);
  }
  xs.push_back(hi);
  double area = 0.0;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    area += 0.5 * (xs[i] - xs[i - 1]) * (tpr_at(xs[i - 1]) + tpr_at(xs[i]));
  }
  return area;
}

double oracle_delta(std::span<const PathPoint> results, Sparsity direction) {
  if (results.empty()) throw InvalidInput("oracle delta needs a nonempty path");
  const PathPoint* best = &results.front();
  const auto sparser = [&](double a, double b) {
    return direction == Sparsity::smaller_is_sparser ? a < b : a > b;
  };
  for (const auto& p : results) {
    const double score = p.metrics.fpr + p.metrics.fnr;
    const double best_score = best->metrics.fpr + best->metrics.fnr;
    if (score < best_score || (score == best_score && sparser(p.delta, best->delta))) best = &p;
  }
  return best->delta;
}

MeanSd mean_sd(std::span<const double> values) {
  MeanSd out;
  out.count = values.size();
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

RateCheck rate_check(std::span<const std::size_t> ns, std::size_t d, std::size_t replicates,
                     std::uint64_t seed, std::size_t threads) {
  if (ns.empty() || replicates == 0) throw InvalidInput("rate check needs sample sizes and replicates");
  if (d < 2) throw InvalidDimension("rate check needs d >= 2");
  const double log_d = std::log(static_cast<double>(d));
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (i > 0 && ns[i] <= ns[i - 1]) throw InvalidInput("sample sizes must be increasing");
    if (static_cast<double>(ns[i]) < 21.0 / log_d + 2.0) {
      throw InvalidInput("each n must satisfy n >= 21 / log d + 2");
    }
  }
  const std::size_t s = std::max<std::size_t>(1, std::min<std::size_t>(10, d / 2));
  const auto model = synthesize_model(d, s);
  const auto transforms = linear_transforms(d);

  RateCheck out{d, replicates, seed, {}};
  for (std::size_t a = 0; a < ns.size(); ++a) {
    const std::size_t n = ns[a];
    std::vector<double> errors(replicates);
    detail::parallel_for(replicates, threads, [&](std::size_t i) {
      const auto sample = sample_nonparanormal(model.sigma0, transforms, n,
                                               derive_seed(derive_seed(seed, a), i));
      errors[i] = max_norm_distance(spearman_sine_matrix(sample.x).matrix, model.sigma0);
    });
    const auto stats = mean_sd(errors);
    RateRow row;
    row.n = n;
    row.mean_error = stats.mean;
    row.sd_error = stats.sd;
    row.rate = std::sqrt(log_d / static_cast<double>(n));
    row.scaled = row.mean_error / row.rate;
    row.bound = 8.0 * std::numbers::pi * row.rate;
    row.bound_vacuous = row.bound >= 2.0;
    row.bound_holds = std::all_of(errors.begin(), errors.end(), [&](double e) { return e <= row.bound; });
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace coca
