#include "tsad/thresholding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tsad/kernels.hpp"

namespace tsad {

const char* to_string(Tail t) { return t == Tail::Lower ? "lower" : "upper"; }

Tail tail_for(Orientation o) { return o == Orientation::LowerAnomalous ? Tail::Lower : Tail::Upper; }

double gpd_log_likelihood(std::span<const double> y, double gamma, double beta) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (!(beta > 0.0)) return kNegInf;
  const double n = static_cast<double>(y.size());
  if (gamma == 0.0) {
    double s = 0.0;
    for (double v : y) s += v;
    return -n * std::log(beta) - s / beta;
  }
  double s = 0.0;
  for (double v : y) {
    const double z = 1.0 + gamma * v / beta;
    if (!(z > 0.0)) return kNegInf;
    s += std::log(z);
  }
  return -n * std::log(beta) - (1.0 + 1.0 / gamma) * s;
}

namespace {

// Profile of the per-observation log-likelihood in theta = gamma/beta.
class Profile {
 public:
  explicit Profile(std::span<const double> y) : y_(y) {
    ymax_ = *std::max_element(y.begin(), y.end());
    double s = 0.0;
    for (double v : y) s += v;
    mean_ = s / static_cast<double>(y.size());
  }

  double ymax() const { return ymax_; }

  GpdParams params(double theta) const {
    if (theta == 0.0) return {0.0, mean_};
    double s = 0.0;
    for (double v : y_) s += std::log1p(theta * v);
    const double gamma = s / static_cast<double>(y_.size());
    return {gamma, gamma / theta};
  }

  double value(double theta) const {
    if (!(theta * ymax_ > -1.0)) return -std::numeric_limits<double>::infinity();
    const GpdParams p = params(theta);
    if (!(p.beta > 0.0) || !std::isfinite(p.beta)) return -std::numeric_limits<double>::infinity();
    return -std::log(p.beta) - p.gamma - 1.0;
  }

  // d value / d theta.
  double gradient(double theta) const {
    if (theta == 0.0) return 0.0;
    double g = 0.0;
    double d = 0.0;
    for (double v : y_) {
      g += std::log1p(theta * v);
      d += v / (1.0 + theta * v);
    }
    const double n = static_cast<double>(y_.size());
    g /= n;
    d /= n;
    return -d / g + 1.0 / theta - d;
  }

 private:
  std::span<const double> y_;
  double ymax_ = 0.0;
  double mean_ = 0.0;
};

// Smallest admissible theta (gamma(theta) = -1), as theta*ymax in (-1, 0).
double lower_scaled_bound(const Profile& prof) {
  // gamma(theta) is increasing in theta; bisect on u = 1 + theta*ymax in log space.
  double lo = std::log(1e-300);
  double hi = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double t = std::expm1(mid);
    if (prof.params(t / prof.ymax()).gamma < -1.0) lo = mid;
    else hi = mid;
  }
  return std::expm1(hi);
}

}  // namespace

GpdFitReport fit_gpd_report(std::span<const double> y) {
  if (y.size() < 2) {
    throw Error(ErrorCode::TooFewExceedances,
                "fit_gpd: need at least 2 exceedances, got " + std::to_string(y.size()));
  }
  for (double v : y) {
    if (!std::isfinite(v) || !(v > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "fit_gpd: exceedances must be finite and positive");
    }
  }
  if (std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; })) {
    throw Error(ErrorCode::DegenerateExceedances, "fit_gpd: all exceedances are equal");
  }

  const Profile prof(y);
  const double ymax = prof.ymax();
  const double t_min = lower_scaled_bound(prof);

  // Candidate theta*ymax values, ascending.
  std::vector<double> ts;
  for (int e = 12; e >= 1; --e) ts.push_back(t_min * (1.0 - std::pow(10.0, -e)));
  ts.insert(ts.begin(), t_min);
  for (int i = 0; i <= 150; ++i) ts.push_back(t_min * std::pow(10.0, -10.0 * i / 150.0));
  ts.push_back(0.0);
  for (int i = 0; i <= 330; ++i) ts.push_back(std::pow(10.0, -10.0 + 22.0 * i / 330.0));
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

  std::size_t best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double v = prof.value(ts[i] / ymax);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }

  double a = ts[best > 0 ? best - 1 : 0];
  double b = ts[std::min(best + 1, ts.size() - 1)];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = prof.value(c / ymax);
  double fd = prof.value(d / ymax);
  GpdFitReport report;
  for (; report.iterations < 500; ++report.iterations) {
    const double mid = 0.5 * (a + b);
    report.gradient = prof.gradient(mid / ymax) / ymax;
    if (std::abs(report.gradient) <= 1e-8 || (b - a) <= 1e-15 * std::max(1e-300, std::abs(mid))) break;
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = prof.value(c / ymax);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = prof.value(d / ymax);
    }
  }
  double t_hat = 0.5 * (a + b);
  if (prof.value(ts[best] / ymax) > prof.value(t_hat / ymax)) t_hat = ts[best];
  report.params = prof.params(t_hat / ymax);
  return report;
}

GpdParams fit_gpd(std::span<const double> exceedances) { return fit_gpd_report(exceedances).params; }

double default_pot_level(const std::string& machine_id) {
  if (machine_id.rfind("1-", 0) == 0) return 0.0050;
  if (machine_id.rfind("2-", 0) == 0) return 0.0075;
  if (machine_id.rfind("3-", 0) == 0) return 0.0001;
  return 0.0050;
}

double pot_final_threshold(const GpdFit& fit, double q, Tail tail) {
  if (fit.exceedance_count == 0 || fit.total_count == 0) {
    throw Error(ErrorCode::NoExceedances, "pot: empty tail");
  }
  const double ratio =
      q * static_cast<double>(fit.total_count) / static_cast<double>(fit.exceedance_count);
  // (beta/gamma) * (ratio^-gamma - 1), written with expm1 for small gamma.
  const double offset = fit.gamma == 0.0
                            ? -fit.beta * std::log(ratio)
                            : fit.beta / fit.gamma * std::expm1(-fit.gamma * std::log(ratio));
  return tail == Tail::Upper ? fit.initial_threshold + offset : fit.initial_threshold - offset;
}

PotResult pot_threshold(const ScoreSeries& train_scores, const PotConfig& cfg) {
  if (train_scores.values.empty()) throw Error(ErrorCode::EmptyInput, "pot: no training scores");
  if (!(cfg.level > 0.0 && cfg.level < 1.0)) throw Error(ErrorCode::InvalidArgument, "pot: level must be in (0,1)");
  if (!(cfg.q > 0.0 && cfg.q < 1.0)) throw Error(ErrorCode::InvalidArgument, "pot: q must be in (0,1)");
  if (cfg.tail != tail_for(train_scores.orientation)) {
    throw Error(ErrorCode::InvalidArgument, std::string("pot: ") + to_string(cfg.tail) +
                                                " tail does not match " +
                                                to_string(train_scores.orientation) + "-anomalous scores");
  }
  require_finite(train_scores.values, "pot");

  std::vector<double> sorted = train_scores.values;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const auto idx = std::min(n - 1, static_cast<std::size_t>(std::floor(cfg.level * static_cast<double>(n))));

  GpdFit fit;
  fit.total_count = n;
  std::vector<double> exc;
  if (cfg.tail == Tail::Lower) {
    fit.initial_threshold = sorted[idx];
    for (double s : sorted) {
      if (s < fit.initial_threshold) exc.push_back(fit.initial_threshold - s);
    }
  } else {
    fit.initial_threshold = sorted[n - 1 - idx];
    for (double s : sorted) {
      if (s > fit.initial_threshold) exc.push_back(s - fit.initial_threshold);
    }
  }
  if (exc.empty()) {
    throw Error(ErrorCode::NoExceedances, std::string("pot: no scores beyond the initial ") +
                                              to_string(cfg.tail) + " threshold");
  }
  fit.exceedance_count = exc.size();
  const GpdParams p = fit_gpd(exc);
  fit.gamma = p.gamma;
  fit.beta = p.beta;
  return {fit, pot_final_threshold(fit, cfg.q, cfg.tail), cfg.level, cfg.q};
}

// ---------------------------------------------------------------------------

std::size_t point_count(const StepRange& r) {
  if (!(r.step > 0.0) || !(r.hi >= r.lo)) return 0;
  return static_cast<std::size_t>(std::floor((r.hi - r.lo) / r.step + 1e-9)) + 1;
}

std::vector<double> grid_points(const GridSpec& spec) {
  std::vector<double> out;
  if (const auto* r = std::get_if<StepRange>(&spec)) {
    const std::size_t n = point_count(*r);
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(r->lo + static_cast<double>(i) * r->step);
  } else {
    const auto& l = std::get<LinSpace>(spec);
    if (l.count == 1) out.push_back(l.lo);
    for (std::size_t i = 0; l.count > 1 && i < l.count; ++i) {
      out.push_back(i + 1 == l.count
                        ? l.hi
                        : l.lo + (l.hi - l.lo) * static_cast<double>(i) / static_cast<double>(l.count - 1));
    }
  }
  return out;
}

LinSpace linspace_matching(std::span<const double> scores, const StepRange& reference) {
  if (scores.empty()) throw Error(ErrorCode::EmptyInput, "linspace_matching: no scores");
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  return {*lo, *hi, point_count(reference)};
}

Mask apply_threshold(const ScoreSeries& scores, double th) {
  Mask out(scores.size());
  if (scores.orientation == Orientation::HigherAnomalous) {
    for (std::size_t t = 0; t < scores.size(); ++t) out[t] = scores.values[t] > th ? 1 : 0;
  } else {
    for (std::size_t t = 0; t < scores.size(); ++t) out[t] = scores.values[t] < th ? 1 : 0;
  }
  return out;
}

GridSearchResult grid_search(const ScoreSeries& scores, std::span<const std::uint8_t> labels,
                             std::span<const double> thresholds, Protocol protocol) {
  if (thresholds.empty()) throw Error(ErrorCode::EmptyGrid, "grid_search: empty grid");
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::LengthMismatch, "grid_search: " + std::to_string(scores.size()) +
                                               " scores vs " + std::to_string(labels.size()) + " labels");
  }
  const ScoreSeries canon = canonicalize(scores);
  const bool flip = scores.orientation == Orientation::LowerAnomalous;
  std::vector<double> canon_th(thresholds.begin(), thresholds.end());
  if (flip) {
    for (auto& t : canon_th) t = 0.0 - t;
  }
  const auto segments = segments_from_labels(labels);
  const auto counts = kernels::sweep_sorted(canon.values, labels, segments, canon_th, protocol);

  std::size_t best = 0;
  MetricTriple best_m = prf1(counts[0]);
  for (std::size_t g = 1; g < counts.size(); ++g) {
    const MetricTriple m = prf1(counts[g]);
    const auto pp = counts[g].predicted_positive();
    const auto best_pp = counts[best].predicted_positive();
    bool take = false;
    if (m.f1 != best_m.f1) take = m.f1 > best_m.f1;
    else if (pp != best_pp) take = pp < best_pp;
    else take = canon_th[g] > canon_th[best];
    if (take) {
      best = g;
      best_m = m;
    }
  }
  return {thresholds[best], best, counts[best], best_m};
}

GridSearchResult grid_search(const ScoreSeries& scores, std::span<const std::uint8_t> labels,
                             const GridSpec& grid, Protocol protocol) {
  const auto pts = grid_points(grid);
  return grid_search(scores, labels, pts, protocol);
}

}  // namespace tsad
