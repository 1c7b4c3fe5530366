#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tsad/core_types.hpp"

namespace tsad {

/// The 28 SMD machine ids in canonical order (1-1..1-8, 2-1..2-9, 3-1..3-11).
const std::vector<std::string>& smd_machine_ids();

struct MachinePaths {
  std::filesystem::path train;
  std::filesystem::path test;
  std::filesystem::path labels;
};

MachinePaths machine_paths(const std::filesystem::path& root, const std::string& machine_id);

/// Reads `<root>/{train,test,test_label}/machine-<id>.txt`. Errors name the file and line.
MachineDataset load_machine(const std::filesystem::path& root, const std::string& machine_id);

/// Writes the dataset in the same layout; values are written in shortest round-trip form.
void write_machine(const std::filesystem::path& root, const MachineDataset& dataset);

/// Reads a comma-separated matrix (one row per line).
Matrix read_matrix_csv(const std::filesystem::path& path);

struct DatasetSummary {
  std::string machine_id;
  std::int64_t total_points = 0;
  std::int64_t test_points = 0;
  std::int64_t anomaly_points = 0;
  double anomaly_pct = 0.0;
  std::int64_t segment_count = 0;
  std::int64_t segment_len_min = 0;
  std::int64_t segment_len_max = 0;
  double segment_len_mean = 0.0;
  /// Population convention.
  double segment_len_std = 0.0;
  std::vector<std::int64_t> segment_lengths;
};

DatasetSummary summarize(const MachineDataset& dataset);

/// Pooled "All" row: point counts summed, segment statistics over all pooled segments.
DatasetSummary summarize_pooled(const std::vector<DatasetSummary>& rows, const std::string& id = "All");

/// `scale * num / den` to 2 decimals, half-up, computed exactly in integers.
std::string format_ratio_2dp(std::int64_t num, std::int64_t den, std::int64_t scale = 1);

/// CSV with a header, one line per row, then the pooled "All" row.
std::string summary_csv(const std::vector<DatasetSummary>& rows);

/// One real per line.
ScoreSeries load_scores(const std::filesystem::path& path, Orientation orientation);

void write_scores(const std::filesystem::path& path, const ScoreSeries& scores);

struct SynthConfig {
  std::string machine_id = "synth-1";
  std::size_t channels = 8;
  std::size_t train_length = 2000;
  std::size_t test_length = 2000;
  std::size_t rank = 2;
  double noise = 0.1;
  std::size_t segment_count = 5;
  std::size_t segment_min = 10;
  std::size_t segment_max = 50;
  double magnitude = 10.0;
  std::uint64_t seed = 42;
};

struct SynthResult {
  MachineDataset dataset;
  std::vector<AnomalySegment> segments;
};

/// x = A z + noise * e with A = Q diag(1, 1/2, ...) (Q orthonormal, M x rank), z and e standard
/// normal. Inside each test segment a unit vector from the orthogonal complement of span(A),
/// scaled by `magnitude`, is added. Fully determined by the seed.
SynthResult generate_synthetic(const SynthConfig& cfg);

}  // namespace tsad
