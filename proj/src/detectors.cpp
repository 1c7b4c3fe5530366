#include "tsad/detectors.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>

#include <Eigen/Eigenvalues>

#include "tsad/kernels.hpp"

namespace tsad {

const char* to_string(PcaMode m) { return m == PcaMode::Residual ? "residual" : "major"; }

PcaMode pca_mode_from_string(const std::string& s) {
  if (s == "residual") return PcaMode::Residual;
  if (s == "major") return PcaMode::Major;
  throw Error(ErrorCode::InvalidArgument, "unknown PCA mode '" + s + "'");
}

Matrix covariance(const Matrix& standardized) { return kernels::covariance_omp(standardized); }

Eigensystem eigendecompose(const Matrix& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() == 0) {
    throw Error(ErrorCode::InvalidArgument, "eigendecompose: matrix must be square and non-empty");
  }
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw Error(ErrorCode::NotSymmetric, "eigendecompose: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sigma);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::DegenerateSpectrum, "eigendecompose: solver did not converge");
  }
  const Eigen::Index m = sigma.rows();
  Eigensystem es;
  es.values.resize(m);
  es.vectors.resize(m, m);
  // Eigen returns ascending order.
  for (Eigen::Index i = 0; i < m; ++i) {
    es.values[i] = solver.eigenvalues()[m - 1 - i];
    es.vectors.col(i) = solver.eigenvectors().col(m - 1 - i);
  }
  const double lead = std::abs(es.values[0]);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (std::abs(es.values[i]) <= 1e-12 * lead) es.values[i] = 0.0;
    for (Eigen::Index r = 0; r < m; ++r) {
      const double v = es.vectors(r, i);
      if (std::abs(v) > 1e-12) {
        if (v < 0) es.vectors.col(i) *= -1.0;
        break;
      }
    }
  }
  return es;
}

std::size_t select_k(std::span<const double> eigenvalues, double tau) {
  if (eigenvalues.empty()) throw Error(ErrorCode::EmptyInput, "select_k: empty spectrum");
  if (!(tau > 0.0 && tau <= 1.0)) throw Error(ErrorCode::InvalidArgument, "select_k: tau must be in (0,1]");
  double total = 0.0;
  for (double v : eigenvalues) total += v;
  if (!(total > 0.0)) throw Error(ErrorCode::DegenerateSpectrum, "select_k: spectrum sums to zero");
  double cum = 0.0;
  for (std::size_t k = 0; k < eigenvalues.size(); ++k) {
    cum += eigenvalues[k];
    if (cum / total >= tau) return k + 1;
  }
  return eigenvalues.size();
}

PcaModel PcaModel::fit(const Matrix& train, double tau) {
  PcaModel model;
  model.tau = tau;
  model.zscore = zscore_fit(train);
  const Matrix z = zscore_apply(train, model.zscore);
  Eigensystem es = eigendecompose(covariance(z));
  model.eigenvectors = std::move(es.vectors);
  model.eigenvalues = std::move(es.values);
  model.k = select_k(std::span<const double>(model.eigenvalues.data(),
                                             static_cast<std::size_t>(model.eigenvalues.size())),
                     tau);
  return model;
}

Matrix PcaModel::basis(PcaMode mode) const {
  const auto m = eigenvectors.cols();
  const auto k = static_cast<Eigen::Index>(this->k);
  return mode == PcaMode::Residual ? Matrix(eigenvectors.rightCols(m - k)) : Matrix(eigenvectors.leftCols(k));
}

void PcaModel::save(std::ostream& os) const {
  const auto m = eigenvectors.rows();
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::setprecision(17);
  os << m << '\n' << k << '\n' << tau << '\n';
  const auto line = [&os](const auto& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
    os << '\n';
  };
  line(eigenvalues);
  for (Eigen::Index r = 0; r < m; ++r) line(Vector(eigenvectors.row(r).transpose()));
  line(zscore.mean);
  line(zscore.std);
  os.flags(flags);
  os.precision(prec);
}

PcaModel PcaModel::load(std::istream& is) {
  PcaModel model;
  Eigen::Index m = 0;
  if (!(is >> m >> model.k >> model.tau) || m <= 0) {
    throw Error(ErrorCode::ParseError, "PcaModel::load: bad header");
  }
  const auto read = [&is](double& v) {
    if (!(is >> v)) throw Error(ErrorCode::ParseError, "PcaModel::load: truncated model");
  };
  model.eigenvalues.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) read(model.eigenvalues[i]);
  model.eigenvectors.resize(m, m);
  for (Eigen::Index r = 0; r < m; ++r)
    for (Eigen::Index c = 0; c < m; ++c) read(model.eigenvectors(r, c));
  model.zscore.mean.resize(m);
  model.zscore.std.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) read(model.zscore.mean[i]);
  for (Eigen::Index i = 0; i < m; ++i) read(model.zscore.std[i]);
  if (model.k < 1 || model.k > static_cast<std::size_t>(m)) {
    throw Error(ErrorCode::ParseError, "PcaModel::load: k out of range");
  }
  return model;
}

double pca_score(const PcaModel& model, const Vector& standardized, PcaMode mode) {
  if (static_cast<std::size_t>(standardized.size()) != model.channels()) {
    throw Error(ErrorCode::LengthMismatch, "pca_score: observation has " +
                                               std::to_string(standardized.size()) + " channels, model " +
                                               std::to_string(model.channels()));
  }
  const auto k = static_cast<Eigen::Index>(model.k);
  const auto m = model.eigenvectors.cols();
  const Eigen::Index first = mode == PcaMode::Residual ? k : 0;
  const Eigen::Index last = mode == PcaMode::Residual ? m : k;
  double s = 0.0;
  for (Eigen::Index i = first; i < last; ++i) {
    double p = 0.0;
    for (Eigen::Index c = 0; c < standardized.size(); ++c) p += model.eigenvectors(c, i) * standardized[c];
    s += p * p;
  }
  return s;
}

double mean_score(const Vector& standardized) {
  if (standardized.size() == 0) throw Error(ErrorCode::EmptyInput, "mean_score: empty observation");
  double s = 0.0;
  for (Eigen::Index c = 0; c < standardized.size(); ++c) s += standardized[c];
  return std::abs(s / static_cast<double>(standardized.size()));
}

namespace {

struct DetectorVisitor {
  const MachineDataset& data;

  DetectorScores operator()(const PcaDetector& d) const {
    const PcaModel model = PcaModel::fit(data.train, d.tau);
    const Matrix basis = model.basis(d.mode);
    return {{kernels::projection_energy_omp(zscore_apply(data.train, model.zscore), basis),
             Orientation::HigherAnomalous},
            {kernels::projection_energy_omp(zscore_apply(data.test, model.zscore), basis),
             Orientation::HigherAnomalous}};
  }

  DetectorScores operator()(const MeanDetector&) const {
    const ZScoreStats stats = zscore_fit(data.train);
    return {{kernels::abs_row_mean_omp(zscore_apply(data.train, stats)), Orientation::HigherAnomalous},
            {kernels::abs_row_mean_omp(zscore_apply(data.test, stats)), Orientation::HigherAnomalous}};
  }
};

}  // namespace

DetectorScores run_detector(const DetectorSpec& spec, const MachineDataset& dataset) {
  dataset.validate();
  return std::visit(DetectorVisitor{dataset}, spec);
}

ScoreSeries score_series(const DetectorSpec& spec, const MachineDataset& dataset) {
  return run_detector(spec, dataset).test;
}

}  // namespace tsad
