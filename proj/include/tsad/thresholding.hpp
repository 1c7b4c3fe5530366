#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tsad/core_types.hpp"
#include "tsad/evaluation.hpp"

namespace tsad {

// ---------------------------------------------------------------------------
// Peaks-over-threshold

enum class Tail { Lower, Upper };

const char* to_string(Tail t);
/// Lower for LowerAnomalous scores, Upper for HigherAnomalous scores.
Tail tail_for(Orientation o);

struct GpdParams {
  double gamma = 0.0;  // shape
  double beta = 1.0;   // scale
};

struct GpdFit {
  double gamma = 0.0;
  double beta = 1.0;
  std::size_t exceedance_count = 0;  // N'_th
  std::size_t total_count = 0;       // N'
  double initial_threshold = 0.0;    // th
};

/// Total GPD log-likelihood; -inf outside the support (beta <= 0 or 1 + gamma*y/beta <= 0).
double gpd_log_likelihood(std::span<const double> exceedances, double gamma, double beta);

struct GpdFitReport {
  GpdParams params;
  std::size_t iterations = 0;
  double gradient = 0.0;
};

/// Maximum-likelihood GPD fit of strictly positive exceedances. The likelihood is profiled over
/// theta = gamma/beta (for fixed theta the optimal gamma is mean(log(1 + theta*y))), the profile
/// is scanned on a log-spaced grid covering the admissible region gamma >= -1, and the best cell is
/// refined by golden-section search.
GpdFitReport fit_gpd_report(std::span<const double> exceedances);
GpdParams fit_gpd(std::span<const double> exceedances);

struct PotConfig {
  /// Fraction of training scores treated as the tail when choosing the initial threshold.
  double level = 0.005;
  /// Risk level.
  double q = 1e-4;
  Tail tail = Tail::Upper;
};

/// Initial tail fraction per SMD group: "1-*" 0.50%, "2-*" 0.75%, "3-*" 0.01%.
double default_pot_level(const std::string& machine_id);

/// th -/+ (beta/gamma) [(q N'/N'_th)^(-gamma) - 1]; the exponential limit beta*ln(N'_th/(q N'))
/// is used when gamma == 0.
double pot_final_threshold(const GpdFit& fit, double q, Tail tail);

struct PotResult {
  GpdFit fit;
  double threshold = 0.0;
  double level = 0.0;
  double q = 0.0;
};

PotResult pot_threshold(const ScoreSeries& train_scores, const PotConfig& cfg);

// ---------------------------------------------------------------------------
// Grid search

struct StepRange {
  double lo = -10000.0;
  double hi = 1000.0;
  double step = 1.0;
};

struct LinSpace {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t count = 2;
};

using GridSpec = std::variant<StepRange, LinSpace>;

std::size_t point_count(const StepRange& r);
std::vector<double> grid_points(const GridSpec& spec);

/// Evenly spaced between min and max of `scores` with as many points as `reference`.
LinSpace linspace_matching(std::span<const double> scores, const StepRange& reference);

/// LowerAnomalous: 1 iff score < th. HigherAnomalous: 1 iff score > th.
Mask apply_threshold(const ScoreSeries& scores, double th);

struct GridSearchResult {
  double threshold = 0.0;
  std::size_t index = 0;
  ConfusionCounts counts;
  MetricTriple metrics;
};

/// Best-F1 threshold; ties go to the fewest predicted positives, then the most conservative
/// threshold.
GridSearchResult grid_search(const ScoreSeries& scores, std::span<const std::uint8_t> labels,
                             std::span<const double> thresholds, Protocol protocol);
GridSearchResult grid_search(const ScoreSeries& scores, std::span<const std::uint8_t> labels,
                             const GridSpec& grid, Protocol protocol);

}  // namespace tsad
