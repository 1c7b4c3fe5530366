#include "tsad/preprocess.hpp"

#include <cmath>

namespace tsad {

MinMaxStats minmax_fit(const Matrix& data) {
  if (data.rows() == 0 || data.cols() == 0) {
    throw Error(ErrorCode::EmptyInput, "minmax_fit: empty matrix");
  }
  return {data.colwise().minCoeff().transpose(), data.colwise().maxCoeff().transpose()};
}

Matrix minmax_apply(const Matrix& data, const MinMaxStats& stats) {
  if (stats.min.size() != data.cols() || stats.max.size() != data.cols()) {
    throw Error(ErrorCode::LengthMismatch, "minmax_apply: stats do not match column count");
  }
  Matrix out(data.rows(), data.cols());
  for (Eigen::Index c = 0; c < data.cols(); ++c) {
    const double range = stats.max[c] - stats.min[c];
    if (range == 0.0) {
      out.col(c).setZero();
    } else {
      out.col(c) = (data.col(c).array() - stats.min[c]) / range;
    }
  }
  return out;
}

ZScoreStats zscore_fit(const Matrix& train) {
  if (train.rows() == 0 || train.cols() == 0) {
    throw Error(ErrorCode::EmptyInput, "zscore_fit: empty matrix");
  }
  const double n = static_cast<double>(train.rows());
  ZScoreStats s;
  s.mean = train.colwise().sum().transpose() / n;
  s.std.resize(train.cols());
  for (Eigen::Index c = 0; c < train.cols(); ++c) {
    const double var = (train.col(c).array() - s.mean[c]).square().sum() / n;
    s.std[c] = std::sqrt(var);
  }
  return s;
}

Matrix zscore_apply(const Matrix& data, const ZScoreStats& stats) {
  if (stats.mean.size() != data.cols() || stats.std.size() != data.cols()) {
    throw Error(ErrorCode::LengthMismatch, "zscore_apply: stats do not match column count");
  }
  Matrix out(data.rows(), data.cols());
  for (Eigen::Index c = 0; c < data.cols(); ++c) {
    if (stats.std[c] == 0.0) {
      out.col(c).setZero();
    } else {
      out.col(c) = (data.col(c).array() - stats.mean[c]) / stats.std[c];
    }
  }
  return out;
}

Vector zscore_apply(const Vector& observation, const ZScoreStats& stats) {
  if (stats.mean.size() != observation.size()) {
    throw Error(ErrorCode::LengthMismatch, "zscore_apply: stats do not match observation size");
  }
  Vector out(observation.size());
  for (Eigen::Index c = 0; c < observation.size(); ++c) {
    out[c] = stats.std[c] == 0.0 ? 0.0 : (observation[c] - stats.mean[c]) / stats.std[c];
  }
  return out;
}

Matrix window(const Matrix& data, std::size_t t, std::size_t w) {
  const auto rows = static_cast<std::size_t>(data.rows());
  if (t + w >= rows) {
    throw Error(ErrorCode::OutOfRange, "window: t+w=" + std::to_string(t + w) +
                                           " beyond " + std::to_string(rows) + " rows");
  }
  return data.middleRows(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(w + 1)).transpose();
}

}  // namespace tsad
