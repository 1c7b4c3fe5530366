#pragma once

#include <iosfwd>
#include <span>
#include <variant>

#include "tsad/core_types.hpp"
#include "tsad/preprocess.hpp"

namespace tsad {

/// Residual scores the components k+1..M (the complement of the retained subspace); Major scores
/// the retained components 1..k.
enum class PcaMode { Residual, Major };

const char* to_string(PcaMode m);
PcaMode pca_mode_from_string(const std::string& s);

struct Eigensystem {
  /// Columns ordered by descending eigenvalue; first nonzero entry of each column is positive.
  Matrix vectors;
  Vector values;
};

/// (1/N) sum_t x_t x_t^T of an already standardized matrix.
Matrix covariance(const Matrix& standardized);

/// Eigenvalues with |lambda| <= 1e-12 * lambda_1 are clamped to 0.
Eigensystem eigendecompose(const Matrix& sigma);

/// Smallest k with cumulative explained variance >= tau.
std::size_t select_k(std::span<const double> eigenvalues, double tau);

struct PcaModel {
  Matrix eigenvectors;
  Vector eigenvalues;
  std::size_t k = 0;
  double tau = 0.5;
  ZScoreStats zscore;

  static PcaModel fit(const Matrix& train, double tau);

  std::size_t channels() const { return static_cast<std::size_t>(eigenvectors.rows()); }
  /// Columns of P spanned by the given mode.
  Matrix basis(PcaMode mode) const;

  /// Text format: M, k, tau, eigenvalues, eigenvector rows, then z-score means and stds;
  /// numbers written with 17 significant digits.
  void save(std::ostream& os) const;
  static PcaModel load(std::istream& is);
};

double pca_score(const PcaModel& model, const Vector& standardized, PcaMode mode = PcaMode::Residual);

/// |mean of the standardized observation|.
double mean_score(const Vector& standardized);

struct PcaDetector {
  double tau = 0.5;
  PcaMode mode = PcaMode::Residual;
};

struct MeanDetector {};

using DetectorSpec = std::variant<PcaDetector, MeanDetector>;

/// Scores for the training rows (used by POT) and for the test rows. Both HigherAnomalous.
struct DetectorScores {
  ScoreSeries train;
  ScoreSeries test;
};

/// Fits on `dataset.train` only and scores both splits.
DetectorScores run_detector(const DetectorSpec& spec, const MachineDataset& dataset);

/// Test-set scores of `run_detector`.
ScoreSeries score_series(const DetectorSpec& spec, const MachineDataset& dataset);

}  // namespace tsad
