#include "tsad/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tsad::kernels {

namespace {

double cov_entry(const Matrix& x, Eigen::Index a, Eigen::Index b) {
  double s = 0.0;
  for (Eigen::Index t = 0; t < x.rows(); ++t) s += x(t, a) * x(t, b);
  return s / static_cast<double>(x.rows());
}

void check_rows(const Matrix& x) {
  if (x.rows() == 0) throw Error(ErrorCode::EmptyInput, "covariance: no observations");
}

double row_energy(const Matrix& x, const Matrix& basis, Eigen::Index t) {
  double e = 0.0;
  for (Eigen::Index c = 0; c < basis.cols(); ++c) {
    double proj = 0.0;
    for (Eigen::Index m = 0; m < x.cols(); ++m) proj += basis(m, c) * x(t, m);
    e += proj * proj;
  }
  return e;
}

double row_abs_mean(const Matrix& x, Eigen::Index t) {
  double s = 0.0;
  for (Eigen::Index m = 0; m < x.cols(); ++m) s += x(t, m);
  return std::abs(s / static_cast<double>(x.cols()));
}

void check_basis(const Matrix& x, const Matrix& basis) {
  if (basis.rows() != x.cols()) {
    throw Error(ErrorCode::LengthMismatch, "projection: basis has " + std::to_string(basis.rows()) +
                                               " rows, observations have " + std::to_string(x.cols()) +
                                               " channels");
  }
}

void check_sweep_inputs(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::LengthMismatch, "sweep: " + std::to_string(scores.size()) + " scores vs " +
                                               std::to_string(labels.size()) + " labels");
  }
}

ConfusionCounts literal_counts(std::span<const double> scores, std::span<const std::uint8_t> labels,
                               std::span<const AnomalySegment> segments, double th, Protocol protocol) {
  Mask pred(scores.size());
  for (std::size_t t = 0; t < scores.size(); ++t) pred[t] = scores[t] > th ? 1 : 0;
  return evaluate_counts(pred, labels, segments, protocol);
}

// Number of entries of ascending `sorted` strictly greater than th.
std::int64_t count_above(const std::vector<double>& sorted, double th) {
  return static_cast<std::int64_t>(sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), th));
}

}  // namespace

Matrix covariance_serial(const Matrix& x) {
  check_rows(x);
  const Eigen::Index m = x.cols();
  Matrix cov(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = a; b < m; ++b) {
      cov(a, b) = cov_entry(x, a, b);
      cov(b, a) = cov(a, b);
    }
  }
  return cov;
}

Matrix covariance_omp(const Matrix& x) {
  check_rows(x);
  const Eigen::Index m = x.cols();
  Matrix cov(m, m);
  const Eigen::Index pairs = m * m;
#pragma omp parallel for schedule(dynamic, 8)
  for (Eigen::Index k = 0; k < pairs; ++k) {
    const Eigen::Index a = k / m;
    const Eigen::Index b = k % m;
    if (b < a) continue;
    const double v = cov_entry(x, a, b);
    cov(a, b) = v;
    cov(b, a) = v;
  }
  return cov;
}

std::vector<double> projection_energy_serial(const Matrix& x, const Matrix& basis) {
  check_basis(x, basis);
  std::vector<double> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index t = 0; t < x.rows(); ++t) out[static_cast<std::size_t>(t)] = row_energy(x, basis, t);
  return out;
}

std::vector<double> projection_energy_omp(const Matrix& x, const Matrix& basis) {
  check_basis(x, basis);
  std::vector<double> out(static_cast<std::size_t>(x.rows()));
#pragma omp parallel for schedule(static)
  for (Eigen::Index t = 0; t < x.rows(); ++t) out[static_cast<std::size_t>(t)] = row_energy(x, basis, t);
  return out;
}

std::vector<double> abs_row_mean_serial(const Matrix& x) {
  std::vector<double> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index t = 0; t < x.rows(); ++t) out[static_cast<std::size_t>(t)] = row_abs_mean(x, t);
  return out;
}

std::vector<double> abs_row_mean_omp(const Matrix& x) {
  std::vector<double> out(static_cast<std::size_t>(x.rows()));
#pragma omp parallel for schedule(static)
  for (Eigen::Index t = 0; t < x.rows(); ++t) out[static_cast<std::size_t>(t)] = row_abs_mean(x, t);
  return out;
}

std::vector<ConfusionCounts> sweep_serial(std::span<const double> higher_scores,
                                          std::span<const std::uint8_t> labels,
                                          std::span<const AnomalySegment> segments,
                                          std::span<const double> thresholds, Protocol protocol) {
  check_sweep_inputs(higher_scores, labels);
  std::vector<ConfusionCounts> out(thresholds.size());
  for (std::size_t g = 0; g < thresholds.size(); ++g) {
    out[g] = literal_counts(higher_scores, labels, segments, thresholds[g], protocol);
  }
  return out;
}

std::vector<ConfusionCounts> sweep_omp(std::span<const double> higher_scores,
                                       std::span<const std::uint8_t> labels,
                                       std::span<const AnomalySegment> segments,
                                       std::span<const double> thresholds, Protocol protocol) {
  check_sweep_inputs(higher_scores, labels);
  std::vector<ConfusionCounts> out(thresholds.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t g = 0; g < static_cast<std::ptrdiff_t>(thresholds.size()); ++g) {
    const auto k = static_cast<std::size_t>(g);
    out[k] = literal_counts(higher_scores, labels, segments, thresholds[k], protocol);
  }
  return out;
}

std::vector<ConfusionCounts> sweep_sorted(std::span<const double> higher_scores,
                                          std::span<const std::uint8_t> labels,
                                          std::span<const AnomalySegment> segments,
                                          std::span<const double> thresholds, Protocol protocol) {
  check_sweep_inputs(higher_scores, labels);
  std::vector<double> normal;
  std::vector<double> anomalous;
  for (std::size_t t = 0; t < labels.size(); ++t) {
    (labels[t] != 0 ? anomalous : normal).push_back(higher_scores[t]);
  }
  std::sort(normal.begin(), normal.end());
  std::sort(anomalous.begin(), anomalous.end());
  const auto n_normal = static_cast<std::int64_t>(normal.size());
  const auto n_anom = static_cast<std::int64_t>(anomalous.size());

  // Under PA a segment is fully detected iff its maximum score exceeds th.
  std::vector<double> seg_max;
  std::vector<std::int64_t> seg_len_suffix;  // total length of segments with max >= seg_max[k]
  if (protocol == Protocol::PointAdjusted) {
    std::vector<std::pair<double, std::int64_t>> segs;
    segs.reserve(segments.size());
    for (const auto& s : segments) {
      if (s.end >= higher_scores.size()) throw Error(ErrorCode::OutOfRange, "sweep: segment out of range");
      double mx = higher_scores[s.start];
      for (std::size_t t = s.start + 1; t <= s.end; ++t) mx = std::max(mx, higher_scores[t]);
      segs.emplace_back(mx, static_cast<std::int64_t>(s.length()));
    }
    std::sort(segs.begin(), segs.end());
    seg_max.resize(segs.size());
    seg_len_suffix.assign(segs.size() + 1, 0);
    for (std::size_t k = segs.size(); k-- > 0;) {
      seg_max[k] = segs[k].first;
      seg_len_suffix[k] = seg_len_suffix[k + 1] + segs[k].second;
    }
  }

  std::vector<ConfusionCounts> out(thresholds.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t g = 0; g < static_cast<std::ptrdiff_t>(thresholds.size()); ++g) {
    const double th = thresholds[static_cast<std::size_t>(g)];
    ConfusionCounts c;
    c.fp = count_above(normal, th);
    c.tn = n_normal - c.fp;
    if (protocol == Protocol::PointWise) {
      c.tp = count_above(anomalous, th);
    } else {
      const auto first = std::upper_bound(seg_max.begin(), seg_max.end(), th) - seg_max.begin();
      c.tp = seg_len_suffix[static_cast<std::size_t>(first)];
    }
    c.fn = n_anom - c.tp;
    out[static_cast<std::size_t>(g)] = c;
  }
  return out;
}

}  // namespace tsad::kernels
