#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tsad/core_types.hpp"

namespace tsad {

enum class Protocol { PointAdjusted, PointWise };

const char* to_string(Protocol p);
Protocol protocol_from_string(const std::string& s);

ConfusionCounts confusion(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> labels);

/// Precision, recall and F1 with every 0/0 resolved to 0.
MetricTriple prf1(const ConfusionCounts& counts);

/// Every ground-truth segment that contains at least one predicted point is filled with 1s.
Mask point_adjust(std::span<const std::uint8_t> pred, std::span<const AnomalySegment> segments);

/// Applies the protocol (PA or none) and returns the confusion counts.
ConfusionCounts evaluate_counts(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> labels,
                                std::span<const AnomalySegment> segments, Protocol protocol);

struct SummaryStats {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  /// Population convention.
  double std = 0.0;
};

SummaryStats summary_stats(std::span<const double> values);

struct SegmentDiagnostics {
  /// Maximal runs of predicted 1s.
  std::int64_t episodes_detected = 0;
  /// Maximal runs of (pred AND ground-truth mask).
  std::int64_t episodes_anomalous = 0;
  /// Ground-truth segments with at least one predicted point.
  std::int64_t segments_detected = 0;
  std::int64_t segment_count = 0;
  /// Percentage of predicted points inside each ground-truth segment, in segment order.
  std::vector<double> coverage_pct;
  SummaryStats coverage;
};

SegmentDiagnostics segment_metrics(std::span<const std::uint8_t> pred,
                                   std::span<const AnomalySegment> segments);

struct RunMetrics {
  std::size_t machine = 0;
  std::size_t run = 0;
  ConfusionCounts counts;
  MetricTriple metrics;
  SegmentDiagnostics segments;
};

// ---------------------------------------------------------------------------
// Aggregation over a machines x runs grid.

enum class Strategy { Average, Macro, Micro };

const char* to_string(Strategy s);

/// Complete machines x runs grid. Cells carry metrics; counts are needed only for Micro.
class MetricGrid {
 public:
  MetricGrid() = default;

  /// counts[i][j] for machine i, run j.
  static MetricGrid from_counts(const std::vector<std::vector<ConfusionCounts>>& counts);
  /// Metric-only grid (Micro is rejected on such a grid).
  static MetricGrid from_metrics(const std::vector<std::vector<MetricTriple>>& metrics);
  /// F1-only grid; precision and recall are set equal to F1.
  static MetricGrid from_f1(const std::vector<std::vector<double>>& f1);

  std::size_t machines() const { return machines_; }
  std::size_t runs() const { return runs_; }
  bool has_counts() const { return !counts_.empty(); }

  const MetricTriple& metrics(std::size_t i, std::size_t j) const { return metrics_[i * runs_ + j]; }
  const ConfusionCounts& counts(std::size_t i, std::size_t j) const { return counts_[i * runs_ + j]; }

 private:
  std::size_t machines_ = 0;
  std::size_t runs_ = 0;
  std::vector<MetricTriple> metrics_;
  std::vector<ConfusionCounts> counts_;
};

/// One run index per machine.
using Assignment = std::vector<std::size_t>;

/// Aggregated P/R/F1 for the cells selected by `assignment` under `strategy`.
MetricTriple assignment_metrics(const MetricGrid& grid, Strategy strategy, const Assignment& assignment);

enum class Direction { Min, Max };

struct Extreme {
  MetricTriple metrics;
  Assignment assignment;
};

struct ExtremeSearchOptions {
  std::size_t restarts = 16;
  std::uint64_t seed = 0;
};

/// Extreme aggregated F1 over all machine-run assignments. Average is solved per machine in closed
/// form; Macro and Micro use steepest-ascent hill climbing from the constant assignments plus
/// `restarts` seeded random ones. Ties resolve to the lexicographically smallest assignment.
Extreme extreme_search(const MetricGrid& grid, Strategy strategy, Direction direction,
                       const ExtremeSearchOptions& options = {});

struct AggregatePanel {
  Strategy strategy = Strategy::Average;
  MetricTriple mean;
  MetricTriple sigma_runs;
  bool sigma_runs_defined = false;
  /// Average strategy only.
  std::optional<MetricTriple> sigma_machines;
  bool sigma_machines_defined = false;
  Extreme min;
  Extreme max;
};

AggregatePanel aggregate(const MetricGrid& grid, Strategy strategy, const ExtremeSearchOptions& options = {});

/// Sample (n-1) standard deviation; 0 with `defined = false` when fewer than two values.
double sample_std(std::span<const double> values, bool* defined = nullptr);

}  // namespace tsad
