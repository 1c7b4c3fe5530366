#pragma once

#include "tsad/core_types.hpp"

namespace tsad {

struct MinMaxStats {
  Vector min;
  Vector max;
};

/// Per-channel mean and population standard deviation.
struct ZScoreStats {
  Vector mean;
  Vector std;
};

MinMaxStats minmax_fit(const Matrix& data);

/// (x - min) / (max - min) per channel, no clipping; constant channels map to 0.
Matrix minmax_apply(const Matrix& data, const MinMaxStats& stats);

ZScoreStats zscore_fit(const Matrix& train);

/// (x - mean) / std per channel; channels with std == 0 map to 0.
Matrix zscore_apply(const Matrix& data, const ZScoreStats& stats);

/// Standardizes a single observation (length M).
Vector zscore_apply(const Vector& observation, const ZScoreStats& stats);

/// M x (w+1) slice whose columns are the observations at t..t+w.
Matrix window(const Matrix& data, std::size_t t, std::size_t w);

}  // namespace tsad
