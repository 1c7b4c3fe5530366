#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tsad/detectors.hpp"
#include "tsad/evaluation.hpp"
#include "tsad/ingestion.hpp"
#include "tsad/thresholding.hpp"

namespace tsad::pipeline {

/// Environment variable consulted when no dataset root is given.
inline constexpr const char* kDataRootEnv = "TSAD_DATA_ROOT";

/// Scores computed elsewhere. Patterns may use {machine}, {run} (0-based) and {run1} (1-based).
struct ExternalDetector {
  std::string test_pattern;
  std::string train_pattern;  // required when POT is requested
  Orientation orientation = Orientation::LowerAnomalous;
};

using DetectorConfig = std::variant<PcaDetector, MeanDetector, ExternalDetector>;

enum class ThresholdMethod { Pot, GridSearch };
const char* to_string(ThresholdMethod m);

struct PotSettings {
  double q = 1e-4;
  /// Overrides the per-group defaults when set.
  std::optional<double> level;
};

enum class GridKind { Auto, Step, LinSpace };

struct GridSettings {
  /// Auto: StepRange for external scores, LinSpace over the test scores for PCA/mean.
  GridKind kind = GridKind::Auto;
  StepRange range;
  /// LinSpace point count; 0 means "same as `range`".
  std::size_t count = 0;
  /// Protocol whose F1 is maximized; nullopt re-selects the threshold for every evaluated protocol.
  std::optional<Protocol> protocol = Protocol::PointAdjusted;
};

struct ExperimentConfig {
  std::filesystem::path data_root;
  std::vector<std::string> machines;
  DetectorConfig detector = PcaDetector{};
  std::vector<ThresholdMethod> methods{ThresholdMethod::Pot, ThresholdMethod::GridSearch};
  PotSettings pot;
  GridSettings gs;
  std::vector<Protocol> protocols{Protocol::PointAdjusted, Protocol::PointWise};
  std::size_t runs = 1;
  std::uint64_t seed = 0;
  std::size_t restarts = 16;
  std::filesystem::path output_dir = "out";
};

/// YAML experiment config. Relative paths are resolved against `base_dir`.
ExperimentConfig parse_experiment_config(const std::string& yaml_text, const std::filesystem::path& base_dir);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Throws InvalidConfig (listing every problem) if the config cannot run.
void validate(const ExperimentConfig& cfg);

/// Per-machine rows plus the "All" row. Missing files for any machine are reported together.
std::string cmd_summarize(const std::filesystem::path& data_root, const std::vector<std::string>& machines);

struct CellRow {
  std::string machine;
  std::size_t machine_index = 0;
  std::size_t run = 0;
  Protocol protocol = Protocol::PointAdjusted;
  ThresholdMethod method = ThresholdMethod::Pot;
  double threshold = 0.0;
  ConfusionCounts counts;
  MetricTriple metrics;
  SegmentDiagnostics segments;
};

struct ThresholdRecord {
  std::string machine;
  std::size_t run = 0;
  ThresholdMethod method = ThresholdMethod::Pot;
  std::optional<Protocol> selected_for;  // grid search only
  double threshold = 0.0;
  std::optional<PotResult> pot;
};

struct CellFailure {
  std::string machine;
  std::optional<std::size_t> run;
  std::string method;
  std::string message;
};

struct RunReport {
  std::vector<CellRow> rows;
  std::vector<ThresholdRecord> thresholds;
  std::vector<CellFailure> failures;
};

/// Executes every (machine, run, protocol, method) cell. `jobs` = 0 uses all cores.
RunReport execute(const ExperimentConfig& cfg, int jobs = 0);

struct RunOutcome {
  int exit_code = 0;
  std::size_t cells = 0;
  std::size_t failures = 0;
};

/// `execute` plus report files in cfg.output_dir: runs.csv, run_means.csv, machine_means.csv,
/// thresholds.json, aggregate.json.
RunOutcome cmd_run(const ExperimentConfig& cfg, int jobs = 0);

/// Synthetic generation config: SynthConfig fields plus a list of machine ids (or `count`);
/// machine i uses seed + i.
std::vector<SynthConfig> parse_synth_config(const std::string& yaml_text);
std::vector<SynthConfig> load_synth_config(const std::filesystem::path& path);

void cmd_synth(const std::vector<SynthConfig>& machines, const std::filesystem::path& out_dir);

// Report writers, exposed for tests.
std::string runs_csv(const RunReport& report);
std::string run_means_csv(const RunReport& report, const ExperimentConfig& cfg);
std::string machine_means_csv(const RunReport& report, const ExperimentConfig& cfg);
std::string thresholds_json(const RunReport& report);
std::string aggregate_json(const RunReport& report, const ExperimentConfig& cfg);

}  // namespace tsad::pipeline
