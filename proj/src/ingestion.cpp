#include "tsad/ingestion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "tsad/io.hpp"

namespace tsad {

namespace fs = std::filesystem;

const std::vector<std::string>& smd_machine_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> v;
    const std::pair<int, int> groups[] = {{1, 8}, {2, 9}, {3, 11}};
    for (const auto& [g, n] : groups)
      for (int i = 1; i <= n; ++i) v.push_back(std::to_string(g) + "-" + std::to_string(i));
    return v;
  }();
  return ids;
}

MachinePaths machine_paths(const fs::path& root, const std::string& machine_id) {
  const std::string file = "machine-" + machine_id + ".txt";
  return {root / "train" / file, root / "test" / file, root / "test_label" / file};
}

namespace {

std::string where(const fs::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line);
}

// Calls fn(line_view, line_number) for each non-final-empty line.
template <typename Fn>
void for_each_line(const std::string& text, Fn&& fn) {
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    fn(std::string_view(text).substr(pos, end - pos), line_no);
    pos = end + 1;
  }
}

}  // namespace

Matrix read_matrix_csv(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::MissingFile, "missing file " + path.string());
  const std::string text = io::read_text_file(path);
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  for_each_line(text, [&](std::string_view line, std::size_t no) {
    if (io::trim(line).empty()) {
      throw Error(ErrorCode::ParseError, where(path, no) + ": empty line");
    }
    std::size_t count = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::string_view tok = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
      double v = 0.0;
      if (!io::parse_double(tok, v)) {
        throw Error(ErrorCode::ParseError,
                    where(path, no) + ": non-numeric token '" + std::string(io::trim(tok)) + "'");
      }
      if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, where(path, no) + ": non-finite value");
      values.push_back(v);
      ++count;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (rows == 0) cols = count;
    else if (count != cols) {
      throw Error(ErrorCode::RaggedRow, where(path, no) + ": " + std::to_string(count) +
                                            " columns, expected " + std::to_string(cols));
    }
    ++rows;
  });
  if (rows == 0) throw Error(ErrorCode::EmptyInput, path.string() + ": no rows");
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::copy(values.begin(), values.end(), m.data());
  return m;
}

namespace {

Mask read_labels(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::MissingFile, "missing file " + path.string());
  const std::string text = io::read_text_file(path);
  Mask labels;
  for_each_line(text, [&](std::string_view line, std::size_t no) {
    const auto tok = io::trim(line);
    if (tok == "0") labels.push_back(0);
    else if (tok == "1") labels.push_back(1);
    else {
      throw Error(ErrorCode::ParseError,
                  where(path, no) + ": label must be 0 or 1, got '" + std::string(tok) + "'");
    }
  });
  return labels;
}

}  // namespace

MachineDataset load_machine(const fs::path& root, const std::string& machine_id) {
  const MachinePaths p = machine_paths(root, machine_id);
  MachineDataset d;
  d.machine_id = machine_id;
  d.train = read_matrix_csv(p.train);
  d.test = read_matrix_csv(p.test);
  d.labels = read_labels(p.labels);
  if (d.train.cols() != d.test.cols()) {
    throw Error(ErrorCode::RaggedRow, p.test.string() + ": " + std::to_string(d.test.cols()) +
                                          " columns, train has " + std::to_string(d.train.cols()));
  }
  if (d.labels.size() != static_cast<std::size_t>(d.test.rows())) {
    throw Error(ErrorCode::LengthMismatch, p.labels.string() + ": " + std::to_string(d.labels.size()) +
                                               " labels for " + std::to_string(d.test.rows()) +
                                               " test rows");
  }
  return d;
}

void write_machine(const fs::path& root, const MachineDataset& dataset) {
  dataset.validate();
  const MachinePaths p = machine_paths(root, dataset.machine_id);
  for (const auto& dir : {p.train.parent_path(), p.test.parent_path(), p.labels.parent_path()}) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  }
  const auto matrix_text = [](const Matrix& m) {
    std::string out;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (c) out += ',';
        out += io::format_double(m(r, c));
      }
      out += '\n';
    }
    return out;
  };
  io::write_file_atomic(p.train, matrix_text(dataset.train));
  io::write_file_atomic(p.test, matrix_text(dataset.test));
  std::string labels;
  for (auto l : dataset.labels) labels += l ? "1\n" : "0\n";
  io::write_file_atomic(p.labels, labels);
}

// ---------------------------------------------------------------------------

namespace {

void fill_segment_stats(DatasetSummary& s) {
  const auto& len = s.segment_lengths;
  s.segment_count = static_cast<std::int64_t>(len.size());
  s.anomaly_points = std::accumulate(len.begin(), len.end(), std::int64_t{0});
  s.anomaly_pct = s.total_points > 0
                      ? 100.0 * static_cast<double>(s.anomaly_points) / static_cast<double>(s.total_points)
                      : 0.0;
  if (len.empty()) return;
  const auto [lo, hi] = std::minmax_element(len.begin(), len.end());
  s.segment_len_min = *lo;
  s.segment_len_max = *hi;
  const double n = static_cast<double>(len.size());
  s.segment_len_mean = static_cast<double>(s.anomaly_points) / n;
  double ss = 0.0;
  for (auto l : len) ss += (static_cast<double>(l) - s.segment_len_mean) * (static_cast<double>(l) - s.segment_len_mean);
  s.segment_len_std = std::sqrt(ss / n);
}

}  // namespace

DatasetSummary summarize(const MachineDataset& dataset) {
  DatasetSummary s;
  s.machine_id = dataset.machine_id;
  s.test_points = static_cast<std::int64_t>(dataset.labels.size());
  s.total_points = static_cast<std::int64_t>(dataset.train.rows()) + s.test_points;
  for (const auto& seg : segments_from_labels(dataset.labels)) {
    s.segment_lengths.push_back(static_cast<std::int64_t>(seg.length()));
  }
  fill_segment_stats(s);
  return s;
}

DatasetSummary summarize_pooled(const std::vector<DatasetSummary>& rows, const std::string& id) {
  DatasetSummary s;
  s.machine_id = id;
  for (const auto& r : rows) {
    s.total_points += r.total_points;
    s.test_points += r.test_points;
    s.segment_lengths.insert(s.segment_lengths.end(), r.segment_lengths.begin(), r.segment_lengths.end());
  }
  fill_segment_stats(s);
  return s;
}

std::string format_ratio_2dp(std::int64_t num, std::int64_t den, std::int64_t scale) {
  if (den <= 0) return "0.00";
  // hundredths = round_half_up(100 * scale * num / den)
  const std::int64_t hundredths = (200 * scale * num + den) / (2 * den);
  std::string frac = std::to_string(hundredths % 100);
  if (frac.size() < 2) frac.insert(0, "0");
  return std::to_string(hundredths / 100) + "." + frac;
}

namespace {

std::string format_2dp(double v) {
  const auto hundredths = static_cast<std::int64_t>(std::floor(v * 100.0 + 0.5));
  std::string frac = std::to_string(hundredths % 100);
  if (frac.size() < 2) frac.insert(0, "0");
  return std::to_string(hundredths / 100) + "." + frac;
}

void append_row(std::string& out, const DatasetSummary& s) {
  std::ostringstream ss;
  ss << s.machine_id << ',' << s.total_points << ',' << s.test_points << ',' << s.anomaly_points << ','
     << format_ratio_2dp(s.anomaly_points, s.total_points, 100) << ',' << s.segment_count << ','
     << s.segment_len_min << ',' << s.segment_len_max << ','
     << format_ratio_2dp(s.anomaly_points, std::max<std::int64_t>(s.segment_count, 1), 1)
     << ',' << format_2dp(s.segment_len_std) << '\n';
  out += ss.str();
}

}  // namespace

std::string summary_csv(const std::vector<DatasetSummary>& rows) {
  std::string out =
      "machine_id,total_points,test_points,anomaly_points,anomaly_pct,segment_count,"
      "segment_len_min,segment_len_max,segment_len_mean,segment_len_std\n";
  for (const auto& r : rows) append_row(out, r);
  append_row(out, summarize_pooled(rows));
  return out;
}

// ---------------------------------------------------------------------------

ScoreSeries load_scores(const fs::path& path, Orientation orientation) {
  if (!fs::exists(path)) throw Error(ErrorCode::MissingFile, "missing file " + path.string());
  const std::string text = io::read_text_file(path);
  ScoreSeries s;
  s.orientation = orientation;
  for_each_line(text, [&](std::string_view line, std::size_t no) {
    double v = 0.0;
    if (!io::parse_double(line, v)) {
      throw Error(ErrorCode::ParseError,
                  where(path, no) + ": not a number '" + std::string(io::trim(line)) + "'");
    }
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, where(path, no) + ": non-finite score");
    s.values.push_back(v);
  });
  if (s.values.empty()) throw Error(ErrorCode::EmptyInput, path.string() + ": no scores");
  return s;
}

void write_scores(const fs::path& path, const ScoreSeries& scores) {
  std::string out;
  for (double v : scores.values) {
    out += io::format_double(v);
    out += '\n';
  }
  io::write_file_atomic(path, out);
}

// ---------------------------------------------------------------------------

SynthResult generate_synthetic(const SynthConfig& cfg) {
  if (cfg.rank == 0 || cfg.rank >= cfg.channels) {
    throw Error(ErrorCode::InvalidArgument, "synth: need 1 <= rank < channels");
  }
  if (cfg.train_length == 0 || cfg.test_length == 0) {
    throw Error(ErrorCode::InvalidArgument, "synth: lengths must be positive");
  }
  if (cfg.segment_min == 0 || cfg.segment_min > cfg.segment_max) {
    throw Error(ErrorCode::InvalidArgument, "synth: need 1 <= segment_min <= segment_max");
  }
  if (!(cfg.noise >= 0.0) || !(cfg.magnitude >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "synth: noise and magnitude must be non-negative");
  }
  if (cfg.segment_count > 0 &&
      cfg.segment_count * cfg.segment_min + (cfg.segment_count - 1) > cfg.test_length) {
    throw Error(ErrorCode::InfeasiblePlacement, "synth: " + std::to_string(cfg.segment_count) +
                                                    " segments cannot fit in " +
                                                    std::to_string(cfg.test_length) + " test points");
  }

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto m = static_cast<Eigen::Index>(cfg.channels);
  const auto rank = static_cast<Eigen::Index>(cfg.rank);

  Eigen::MatrixXd g(m, m);
  for (Eigen::Index c = 0; c < m; ++c)
    for (Eigen::Index r = 0; r < m; ++r) g(r, c) = normal(rng);
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
  Eigen::MatrixXd mixing = q.leftCols(rank);
  for (Eigen::Index c = 0; c < rank; ++c) mixing.col(c) /= static_cast<double>(c + 1);
  const Eigen::MatrixXd complement = q.rightCols(m - rank);

  const auto sample = [&](std::size_t rows) {
    Matrix x(static_cast<Eigen::Index>(rows), m);
    Vector z(rank);
    for (Eigen::Index t = 0; t < x.rows(); ++t) {
      for (Eigen::Index i = 0; i < rank; ++i) z[i] = normal(rng);
      const Vector clean = mixing * z;
      for (Eigen::Index c = 0; c < m; ++c) x(t, c) = clean[c] + cfg.noise * normal(rng);
    }
    return x;
  };

  SynthResult out;
  out.dataset.machine_id = cfg.machine_id;
  out.dataset.train = sample(cfg.train_length);
  out.dataset.test = sample(cfg.test_length);

  // Segment lengths, then random gaps (each gap >= 1 between segments).
  std::uniform_int_distribution<std::size_t> len_dist(cfg.segment_min, cfg.segment_max);
  std::vector<std::size_t> lengths(cfg.segment_count);
  std::size_t required = 0;
  for (int attempt = 0;; ++attempt) {
    for (auto& l : lengths) l = len_dist(rng);
    required = std::accumulate(lengths.begin(), lengths.end(), std::size_t{0}) +
               (cfg.segment_count > 0 ? cfg.segment_count - 1 : 0);
    if (required <= cfg.test_length) break;
    if (attempt == 1000) {
      throw Error(ErrorCode::InfeasiblePlacement, "synth: could not place segments; shrink segment_max");
    }
  }
  const std::size_t slack = cfg.test_length - required;
  std::uniform_int_distribution<std::size_t> cut_dist(0, slack);
  std::vector<std::size_t> cuts(cfg.segment_count);
  for (auto& c : cuts) c = cut_dist(rng);
  std::sort(cuts.begin(), cuts.end());

  std::size_t pos = 0;
  std::size_t prev_cut = 0;
  for (std::size_t s = 0; s < cfg.segment_count; ++s) {
    pos += cuts[s] - prev_cut;
    prev_cut = cuts[s];
    out.segments.push_back({pos, pos + lengths[s] - 1});
    pos += lengths[s] + 1;
  }

  for (const auto& seg : out.segments) {
    Vector w(m - rank);
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = normal(rng);
    const Vector dir = complement * w.normalized();
    for (std::size_t t = seg.start; t <= seg.end; ++t) {
      out.dataset.test.row(static_cast<Eigen::Index>(t)) += cfg.magnitude * dir.transpose();
    }
  }
  out.dataset.labels = mask_from_segments(out.segments, cfg.test_length);
  return out;
}

}  // namespace tsad
