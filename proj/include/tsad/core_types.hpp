#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tsad {

/// Rows are timesteps, columns are channels.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Binary sequence (0/1), one entry per timestep.
using Mask = std::vector<std::uint8_t>;

enum class ErrorCode {
  InvalidArgument,
  NonFinite,
  OutOfRange,
  LengthMismatch,
  MissingFile,
  RaggedRow,
  ParseError,
  EmptyInput,
  NotSymmetric,
  DegenerateSpectrum,
  TooFewExceedances,
  DegenerateExceedances,
  NoExceedances,
  InfeasiblePlacement,
  EmptyGrid,
  RaggedGrid,
  InvalidConfig,
  IoError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

enum class Orientation { HigherAnomalous, LowerAnomalous };

const char* to_string(Orientation o);
Orientation orientation_from_string(const std::string& s);

struct MachineDataset {
  std::string machine_id;
  Matrix train;
  Matrix test;
  Mask labels;

  std::size_t channels() const { return static_cast<std::size_t>(train.cols()); }
  /// Throws if the shape or finiteness invariants are broken.
  void validate() const;
};

/// Inclusive [start, end], 0-indexed.
struct AnomalySegment {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start + 1; }
  bool operator==(const AnomalySegment&) const = default;
};

struct ScoreSeries {
  std::vector<double> values;
  Orientation orientation = Orientation::HigherAnomalous;

  std::size_t size() const { return values.size(); }
};

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;

  std::int64_t total() const { return tp + fp + fn + tn; }
  std::int64_t predicted_positive() const { return tp + fp; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  bool operator==(const ConfusionCounts&) const = default;
};

struct MetricTriple {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Harmonic mean of precision and recall; 0 when both are 0.
double f1_from(double precision, double recall);

ScoreSeries canonicalize(const ScoreSeries& s);

std::vector<AnomalySegment> segments_from_labels(std::span<const std::uint8_t> labels);

Mask mask_from_segments(std::span<const AnomalySegment> segments, std::size_t length);

void require_finite(std::span<const double> values, const char* what);

}  // namespace tsad
