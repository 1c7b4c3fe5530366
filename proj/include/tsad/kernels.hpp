#pragma once

// Data-parallel inner loops. Each kernel has a serial reference (`*_serial`) and an OpenMP
// version (`*_omp`). The OpenMP versions partition work so that every output element is
// computed by exactly the same arithmetic as the serial reference, so both return
// bit-identical results regardless of thread count.

#include <span>
#include <vector>

#include "tsad/core_types.hpp"
#include "tsad/evaluation.hpp"

namespace tsad::kernels {

/// (1/N) X^T X over the rows of `x`.
Matrix covariance_serial(const Matrix& x);
Matrix covariance_omp(const Matrix& x);

/// Per-row squared norm of the projection onto the columns of `basis` (M x b, orthonormal).
std::vector<double> projection_energy_serial(const Matrix& x, const Matrix& basis);
std::vector<double> projection_energy_omp(const Matrix& x, const Matrix& basis);

/// Per-row |mean of the row|.
std::vector<double> abs_row_mean_serial(const Matrix& x);
std::vector<double> abs_row_mean_omp(const Matrix& x);

/// Confusion counts for every threshold (predict 1 iff score > th) under `protocol`.
/// The serial version applies threshold, adjustment and counting literally per threshold.
std::vector<ConfusionCounts> sweep_serial(std::span<const double> higher_scores,
                                          std::span<const std::uint8_t> labels,
                                          std::span<const AnomalySegment> segments,
                                          std::span<const double> thresholds, Protocol protocol);
std::vector<ConfusionCounts> sweep_omp(std::span<const double> higher_scores,
                                       std::span<const std::uint8_t> labels,
                                       std::span<const AnomalySegment> segments,
                                       std::span<const double> thresholds, Protocol protocol);

/// Same counts as `sweep_serial`, computed from sorted normal-point and anomaly scores (and
/// per-segment maxima under PA) with one binary search per threshold. Thresholds are
/// processed in parallel.
std::vector<ConfusionCounts> sweep_sorted(std::span<const double> higher_scores,
                                          std::span<const std::uint8_t> labels,
                                          std::span<const AnomalySegment> segments,
                                          std::span<const double> thresholds, Protocol protocol);

}  // namespace tsad::kernels
