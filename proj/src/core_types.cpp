#include "tsad/core_types.hpp"

#include <cmath>

namespace tsad {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::NonFinite: return "non-finite";
    case ErrorCode::OutOfRange: return "out-of-range";
    case ErrorCode::LengthMismatch: return "length-mismatch";
    case ErrorCode::MissingFile: return "missing-file";
    case ErrorCode::RaggedRow: return "ragged-row";
    case ErrorCode::ParseError: return "parse-error";
    case ErrorCode::EmptyInput: return "empty-input";
    case ErrorCode::NotSymmetric: return "not-symmetric";
    case ErrorCode::DegenerateSpectrum: return "degenerate-spectrum";
    case ErrorCode::TooFewExceedances: return "too-few-exceedances";
    case ErrorCode::DegenerateExceedances: return "degenerate-exceedances";
    case ErrorCode::NoExceedances: return "no-exceedances";
    case ErrorCode::InfeasiblePlacement: return "infeasible-placement";
    case ErrorCode::EmptyGrid: return "empty-grid";
    case ErrorCode::RaggedGrid: return "ragged-grid";
    case ErrorCode::InvalidConfig: return "invalid-config";
    case ErrorCode::IoError: return "io-error";
  }
  return "unknown";
}

const char* to_string(Orientation o) {
  return o == Orientation::HigherAnomalous ? "higher" : "lower";
}

Orientation orientation_from_string(const std::string& s) {
  if (s == "higher" || s == "higher_anomalous") return Orientation::HigherAnomalous;
  if (s == "lower" || s == "lower_anomalous") return Orientation::LowerAnomalous;
  throw Error(ErrorCode::InvalidArgument, "unknown orientation '" + s + "'");
}

void MachineDataset::validate() const {
  if (train.cols() != test.cols()) {
    throw Error(ErrorCode::LengthMismatch,
                machine_id + ": train has " + std::to_string(train.cols()) + " columns, test has " +
                    std::to_string(test.cols()));
  }
  if (labels.size() != static_cast<std::size_t>(test.rows())) {
    throw Error(ErrorCode::LengthMismatch,
                machine_id + ": " + std::to_string(labels.size()) + " labels for " +
                    std::to_string(test.rows()) + " test rows");
  }
  if (!train.allFinite() || !test.allFinite()) {
    throw Error(ErrorCode::NonFinite, machine_id + ": non-finite value in data");
  }
  for (auto l : labels) {
    if (l > 1) throw Error(ErrorCode::InvalidArgument, machine_id + ": label not in {0,1}");
  }
}

double f1_from(double precision, double recall) {
  const double denom = precision + recall;
  return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

void require_finite(std::span<const double> values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error(ErrorCode::NonFinite,
                  std::string(what) + ": non-finite value at index " + std::to_string(i));
    }
  }
}

ScoreSeries canonicalize(const ScoreSeries& s) {
  require_finite(s.values, "canonicalize");
  ScoreSeries out{s.values, Orientation::HigherAnomalous};
  if (s.orientation == Orientation::LowerAnomalous) {
    // 0.0 - v keeps +0 for zero inputs.
    for (auto& v : out.values) v = 0.0 - v;
  }
  return out;
}

std::vector<AnomalySegment> segments_from_labels(std::span<const std::uint8_t> labels) {
  std::vector<AnomalySegment> out;
  std::size_t i = 0;
  const std::size_t n = labels.size();
  while (i < n) {
    if (labels[i] == 0) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < n && labels[i] != 0) ++i;
    out.push_back({start, i - 1});
  }
  return out;
}

Mask mask_from_segments(std::span<const AnomalySegment> segments, std::size_t length) {
  Mask mask(length, 0);
  for (const auto& seg : segments) {
    if (seg.start > seg.end || seg.end >= length) {
      throw Error(ErrorCode::OutOfRange, "segment [" + std::to_string(seg.start) + "," +
                                             std::to_string(seg.end) + "] outside series of length " +
                                             std::to_string(length));
    }
    for (std::size_t t = seg.start; t <= seg.end; ++t) mask[t] = 1;
  }
  return mask;
}

}  // namespace tsad
