#include "tsad/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace tsad {

const char* to_string(Protocol p) { return p == Protocol::PointAdjusted ? "pa" : "pointwise"; }

Protocol protocol_from_string(const std::string& s) {
  if (s == "pa" || s == "PA" || s == "point_adjusted") return Protocol::PointAdjusted;
  if (s == "pointwise" || s == "pw" || s == "point_wise") return Protocol::PointWise;
  throw Error(ErrorCode::InvalidArgument, "unknown protocol '" + s + "'");
}

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::Average: return "average";
    case Strategy::Macro: return "macro";
    case Strategy::Micro: return "micro";
  }
  return "unknown";
}

ConfusionCounts confusion(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> labels) {
  if (pred.size() != labels.size()) {
    throw Error(ErrorCode::LengthMismatch, "confusion: " + std::to_string(pred.size()) +
                                               " predictions vs " + std::to_string(labels.size()) +
                                               " labels");
  }
  ConfusionCounts c;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    const bool p = pred[t] != 0;
    const bool l = labels[t] != 0;
    if (p && l) ++c.tp;
    else if (p) ++c.fp;
    else if (l) ++c.fn;
    else ++c.tn;
  }
  return c;
}

MetricTriple prf1(const ConfusionCounts& c) {
  MetricTriple m;
  const auto pp = c.tp + c.fp;
  const auto ap = c.tp + c.fn;
  m.precision = pp > 0 ? static_cast<double>(c.tp) / static_cast<double>(pp) : 0.0;
  m.recall = ap > 0 ? static_cast<double>(c.tp) / static_cast<double>(ap) : 0.0;
  m.f1 = f1_from(m.precision, m.recall);
  return m;
}

Mask point_adjust(std::span<const std::uint8_t> pred, std::span<const AnomalySegment> segments) {
  Mask out(pred.begin(), pred.end());
  for (const auto& seg : segments) {
    if (seg.end >= pred.size()) {
      throw Error(ErrorCode::OutOfRange, "point_adjust: segment beyond prediction length");
    }
    const auto first = pred.begin() + static_cast<std::ptrdiff_t>(seg.start);
    const auto last = pred.begin() + static_cast<std::ptrdiff_t>(seg.end) + 1;
    if (std::any_of(first, last, [](std::uint8_t v) { return v != 0; })) {
      std::fill(out.begin() + static_cast<std::ptrdiff_t>(seg.start),
                out.begin() + static_cast<std::ptrdiff_t>(seg.end) + 1, std::uint8_t{1});
    }
  }
  return out;
}

ConfusionCounts evaluate_counts(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> labels,
                                std::span<const AnomalySegment> segments, Protocol protocol) {
  if (protocol == Protocol::PointWise) return confusion(pred, labels);
  const Mask adjusted = point_adjust(pred, segments);
  return confusion(adjusted, labels);
}

SummaryStats summary_stats(std::span<const double> values) {
  SummaryStats s;
  if (values.empty()) return s;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / n);
  return s;
}

namespace {

std::int64_t count_runs(std::span<const std::uint8_t> mask) {
  std::int64_t runs = 0;
  bool prev = false;
  for (auto v : mask) {
    const bool cur = v != 0;
    if (cur && !prev) ++runs;
    prev = cur;
  }
  return runs;
}

}  // namespace

SegmentDiagnostics segment_metrics(std::span<const std::uint8_t> pred,
                                   std::span<const AnomalySegment> segments) {
  SegmentDiagnostics d;
  d.episodes_detected = count_runs(pred);

  const Mask truth = mask_from_segments(segments, pred.size());
  Mask both(pred.size(), 0);
  for (std::size_t t = 0; t < pred.size(); ++t) both[t] = (pred[t] != 0 && truth[t] != 0) ? 1 : 0;
  d.episodes_anomalous = count_runs(both);

  d.segment_count = static_cast<std::int64_t>(segments.size());
  d.coverage_pct.reserve(segments.size());
  for (const auto& seg : segments) {
    std::size_t hit = 0;
    for (std::size_t t = seg.start; t <= seg.end; ++t) hit += pred[t] != 0 ? 1 : 0;
    if (hit > 0) ++d.segments_detected;
    d.coverage_pct.push_back(100.0 * static_cast<double>(hit) / static_cast<double>(seg.length()));
  }
  d.coverage = summary_stats(d.coverage_pct);
  return d;
}

// ---------------------------------------------------------------------------

MetricGrid MetricGrid::from_counts(const std::vector<std::vector<ConfusionCounts>>& counts) {
  MetricGrid g;
  g.machines_ = counts.size();
  g.runs_ = counts.empty() ? 0 : counts.front().size();
  if (g.machines_ == 0 || g.runs_ == 0) throw Error(ErrorCode::RaggedGrid, "empty metric grid");
  for (const auto& row : counts) {
    if (row.size() != g.runs_) throw Error(ErrorCode::RaggedGrid, "ragged metric grid");
    for (const auto& c : row) {
      g.counts_.push_back(c);
      g.metrics_.push_back(prf1(c));
    }
  }
  return g;
}

MetricGrid MetricGrid::from_metrics(const std::vector<std::vector<MetricTriple>>& metrics) {
  MetricGrid g;
  g.machines_ = metrics.size();
  g.runs_ = metrics.empty() ? 0 : metrics.front().size();
  if (g.machines_ == 0 || g.runs_ == 0) throw Error(ErrorCode::RaggedGrid, "empty metric grid");
  for (const auto& row : metrics) {
    if (row.size() != g.runs_) throw Error(ErrorCode::RaggedGrid, "ragged metric grid");
    g.metrics_.insert(g.metrics_.end(), row.begin(), row.end());
  }
  return g;
}

MetricGrid MetricGrid::from_f1(const std::vector<std::vector<double>>& f1) {
  std::vector<std::vector<MetricTriple>> m;
  m.reserve(f1.size());
  for (const auto& row : f1) {
    auto& out = m.emplace_back();
    for (double v : row) out.push_back({v, v, v});
  }
  return from_metrics(m);
}

MetricTriple assignment_metrics(const MetricGrid& grid, Strategy strategy, const Assignment& assignment) {
  if (assignment.size() != grid.machines()) {
    throw Error(ErrorCode::LengthMismatch, "assignment size does not match machine count");
  }
  const double n = static_cast<double>(grid.machines());
  switch (strategy) {
    case Strategy::Average: {
      MetricTriple sum;
      for (std::size_t i = 0; i < grid.machines(); ++i) {
        const auto& m = grid.metrics(i, assignment[i]);
        sum.precision += m.precision;
        sum.recall += m.recall;
        sum.f1 += m.f1;
      }
      return {sum.precision / n, sum.recall / n, sum.f1 / n};
    }
    case Strategy::Macro: {
      double p = 0.0;
      double r = 0.0;
      for (std::size_t i = 0; i < grid.machines(); ++i) {
        const auto& m = grid.metrics(i, assignment[i]);
        p += m.precision;
        r += m.recall;
      }
      p /= n;
      r /= n;
      return {p, r, f1_from(p, r)};
    }
    case Strategy::Micro: {
      if (!grid.has_counts()) {
        throw Error(ErrorCode::InvalidArgument, "micro aggregation needs confusion counts");
      }
      ConfusionCounts pooled;
      for (std::size_t i = 0; i < grid.machines(); ++i) pooled += grid.counts(i, assignment[i]);
      return prf1(pooled);
    }
  }
  return {};
}

double sample_std(std::span<const double> values, bool* defined) {
  if (values.size() < 2) {
    if (defined) *defined = false;
    return 0.0;
  }
  if (defined) *defined = true;
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (n - 1.0));
}

namespace {

struct Candidate {
  double value;
  Assignment assignment;
};

// `sign` is +1 to maximize F1, -1 to minimize.
bool better(const Candidate& a, const Candidate& b, double sign) {
  const double va = sign * a.value;
  const double vb = sign * b.value;
  if (va != vb) return va > vb;
  return a.assignment < b.assignment;
}

Candidate climb(const MetricGrid& grid, Strategy strategy, double sign, Assignment start) {
  Candidate cur{assignment_metrics(grid, strategy, start).f1, std::move(start)};
  for (;;) {
    Candidate best = cur;
    bool moved = false;
    Assignment probe = cur.assignment;
    for (std::size_t i = 0; i < grid.machines(); ++i) {
      const std::size_t keep = probe[i];
      for (std::size_t j = 0; j < grid.runs(); ++j) {
        if (j == keep) continue;
        probe[i] = j;
        const double v = assignment_metrics(grid, strategy, probe).f1;
        if (sign * v > sign * best.value) {
          best = {v, probe};
          moved = true;
        }
      }
      probe[i] = keep;
    }
    if (!moved) return cur;
    cur = std::move(best);
  }
}

}  // namespace

Extreme extreme_search(const MetricGrid& grid, Strategy strategy, Direction direction,
                       const ExtremeSearchOptions& options) {
  const double sign = direction == Direction::Max ? 1.0 : -1.0;
  const std::size_t n = grid.machines();
  const std::size_t r = grid.runs();

  if (strategy == Strategy::Average || r == 1) {
    // Average F1 is separable across machines.
    Assignment a(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 1; j < r; ++j) {
        if (sign * grid.metrics(i, j).f1 > sign * grid.metrics(i, a[i]).f1) a[i] = j;
      }
    }
    if (strategy == Strategy::Average) return {assignment_metrics(grid, strategy, a), a};
    return {assignment_metrics(grid, strategy, Assignment(n, 0)), Assignment(n, 0)};
  }

  std::vector<Assignment> starts;
  starts.reserve(r + options.restarts);
  for (std::size_t j = 0; j < r; ++j) starts.emplace_back(n, j);
  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<std::size_t> pick(0, r - 1);
  for (std::size_t s = 0; s < options.restarts; ++s) {
    Assignment a(n);
    for (auto& v : a) v = pick(rng);
    starts.push_back(std::move(a));
  }

  std::vector<Candidate> results(starts.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t s = 0; s < static_cast<std::ptrdiff_t>(starts.size()); ++s) {
    results[static_cast<std::size_t>(s)] = climb(grid, strategy, sign, starts[static_cast<std::size_t>(s)]);
  }

  Candidate best = results.front();
  for (std::size_t s = 1; s < results.size(); ++s) {
    if (better(results[s], best, sign)) best = results[s];
  }
  return {assignment_metrics(grid, strategy, best.assignment), best.assignment};
}

AggregatePanel aggregate(const MetricGrid& grid, Strategy strategy, const ExtremeSearchOptions& options) {
  const std::size_t n = grid.machines();
  const std::size_t r = grid.runs();
  if (n == 0 || r == 0) throw Error(ErrorCode::RaggedGrid, "aggregate: empty grid");

  AggregatePanel panel;
  panel.strategy = strategy;

  // Per-run aggregated triples; for Average these are the run means.
  std::vector<double> run_p(r), run_r(r), run_f(r);
  for (std::size_t j = 0; j < r; ++j) {
    const MetricTriple m = assignment_metrics(grid, strategy, Assignment(n, j));
    run_p[j] = m.precision;
    run_r[j] = m.recall;
    run_f[j] = m.f1;
  }
  const auto mean_of = [](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  panel.mean = {mean_of(run_p), mean_of(run_r), mean_of(run_f)};
  panel.sigma_runs = {sample_std(run_p, &panel.sigma_runs_defined), sample_std(run_r),
                      sample_std(run_f)};

  if (strategy == Strategy::Average) {
    std::vector<double> mach_p(n, 0.0), mach_r(n, 0.0), mach_f(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < r; ++j) {
        mach_p[i] += grid.metrics(i, j).precision;
        mach_r[i] += grid.metrics(i, j).recall;
        mach_f[i] += grid.metrics(i, j).f1;
      }
      mach_p[i] /= static_cast<double>(r);
      mach_r[i] /= static_cast<double>(r);
      mach_f[i] /= static_cast<double>(r);
    }
    panel.sigma_machines =
        MetricTriple{sample_std(mach_p, &panel.sigma_machines_defined), sample_std(mach_r), sample_std(mach_f)};
  }

  panel.min = extreme_search(grid, strategy, Direction::Min, options);
  panel.max = extreme_search(grid, strategy, Direction::Max, options);
  return panel;
}

}  // namespace tsad
