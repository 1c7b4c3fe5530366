#include "tsad/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <sstream>

#include <omp.h>
#include <yaml-cpp/yaml.h>

#include "json.hpp"
#include "tsad/io.hpp"

namespace tsad::pipeline {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

const char* to_string(ThresholdMethod m) { return m == ThresholdMethod::Pot ? "pot" : "gs"; }

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); }

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

std::string resolve_pattern(const fs::path& base, const std::string& p) {
  return resolve(base, p).string();
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& key) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception& e) {
    config_error("config key '" + key + "': " + e.what());
  }
}

std::string substitute(std::string pattern, const std::string& machine, std::size_t run) {
  const auto replace_all = [&pattern](const std::string& key, const std::string& value) {
    for (std::size_t pos = pattern.find(key); pos != std::string::npos; pos = pattern.find(key, pos + value.size())) {
      pattern.replace(pos, key.size(), value);
    }
  };
  replace_all("{machine}", machine);
  replace_all("{run1}", std::to_string(run + 1));
  replace_all("{run}", std::to_string(run));
  return pattern;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& yaml_text, const fs::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    config_error(std::string("config is not valid YAML: ") + e.what());
  }
  if (!root.IsMap()) config_error("config must be a mapping");

  ExperimentConfig cfg;
  if (root["data_root"]) {
    cfg.data_root = resolve(base_dir, scalar<std::string>(root["data_root"], "data_root"));
  } else if (const char* env = std::getenv(kDataRootEnv)) {
    cfg.data_root = env;
  }
  if (root["machines"]) {
    for (const auto& m : root["machines"]) cfg.machines.push_back(scalar<std::string>(m, "machines"));
  } else {
    cfg.machines = smd_machine_ids();
  }

  if (const auto det = root["detector"]) {
    const auto type = det["type"] ? scalar<std::string>(det["type"], "detector.type") : "pca";
    if (type == "pca") {
      PcaDetector p;
      if (det["tau"]) p.tau = scalar<double>(det["tau"], "detector.tau");
      if (det["mode"]) p.mode = pca_mode_from_string(scalar<std::string>(det["mode"], "detector.mode"));
      cfg.detector = p;
    } else if (type == "mean") {
      cfg.detector = MeanDetector{};
    } else if (type == "external") {
      ExternalDetector e;
      if (!det["test_scores"]) config_error("detector.test_scores is required for external scores");
      e.test_pattern = resolve_pattern(base_dir, scalar<std::string>(det["test_scores"], "detector.test_scores"));
      if (det["train_scores"]) {
        e.train_pattern =
            resolve_pattern(base_dir, scalar<std::string>(det["train_scores"], "detector.train_scores"));
      }
      if (det["orientation"]) {
        e.orientation = orientation_from_string(scalar<std::string>(det["orientation"], "detector.orientation"));
      }
      cfg.detector = e;
    } else {
      config_error("unknown detector type '" + type + "'");
    }
  }

  if (const auto th = root["threshold"]) {
    if (th["methods"]) {
      cfg.methods.clear();
      for (const auto& m : th["methods"]) {
        const auto s = scalar<std::string>(m, "threshold.methods");
        if (s == "pot") cfg.methods.push_back(ThresholdMethod::Pot);
        else if (s == "gs") cfg.methods.push_back(ThresholdMethod::GridSearch);
        else config_error("unknown threshold method '" + s + "'");
      }
    }
    if (const auto pot = th["pot"]) {
      if (pot["q"]) cfg.pot.q = scalar<double>(pot["q"], "threshold.pot.q");
      if (pot["level"]) cfg.pot.level = scalar<double>(pot["level"], "threshold.pot.level");
    }
    if (const auto gs = th["gs"]) {
      if (gs["grid"]) {
        const auto k = scalar<std::string>(gs["grid"], "threshold.gs.grid");
        if (k == "auto") cfg.gs.kind = GridKind::Auto;
        else if (k == "step") cfg.gs.kind = GridKind::Step;
        else if (k == "linspace") cfg.gs.kind = GridKind::LinSpace;
        else config_error("unknown grid kind '" + k + "'");
      }
      if (gs["lo"]) cfg.gs.range.lo = scalar<double>(gs["lo"], "threshold.gs.lo");
      if (gs["hi"]) cfg.gs.range.hi = scalar<double>(gs["hi"], "threshold.gs.hi");
      if (gs["step"]) cfg.gs.range.step = scalar<double>(gs["step"], "threshold.gs.step");
      if (gs["count"]) cfg.gs.count = scalar<std::size_t>(gs["count"], "threshold.gs.count");
      if (gs["protocol"]) {
        const auto p = scalar<std::string>(gs["protocol"], "threshold.gs.protocol");
        if (p == "matched") cfg.gs.protocol.reset();
        else cfg.gs.protocol = protocol_from_string(p);
      }
    }
  }

  if (root["protocols"]) {
    cfg.protocols.clear();
    for (const auto& p : root["protocols"]) {
      cfg.protocols.push_back(protocol_from_string(scalar<std::string>(p, "protocols")));
    }
  }
  if (root["runs"]) cfg.runs = scalar<std::size_t>(root["runs"], "runs");
  if (root["seed"]) cfg.seed = scalar<std::uint64_t>(root["seed"], "seed");
  if (root["restarts"]) cfg.restarts = scalar<std::size_t>(root["restarts"], "restarts");
  if (root["output"]) cfg.output_dir = resolve(base_dir, scalar<std::string>(root["output"], "output"));
  return cfg;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  std::string text;
  try {
    text = io::read_text_file(path);
  } catch (const Error& e) {
    config_error(e.what());
  }
  return parse_experiment_config(text, path.parent_path());
}

void validate(const ExperimentConfig& cfg) {
  std::vector<std::string> problems;
  if (cfg.runs < 1) problems.push_back("runs must be >= 1");
  if (cfg.machines.empty()) problems.push_back("machine list is empty");
  if (cfg.methods.empty()) problems.push_back("no threshold methods");
  if (cfg.protocols.empty()) problems.push_back("no evaluation protocols");
  if (!(cfg.pot.q > 0.0 && cfg.pot.q < 1.0)) problems.push_back("threshold.pot.q must be in (0,1)");
  if (cfg.pot.level && !(*cfg.pot.level > 0.0 && *cfg.pot.level < 1.0)) {
    problems.push_back("threshold.pot.level must be in (0,1)");
  }
  if (point_count(cfg.gs.range) == 0) problems.push_back("threshold.gs range is empty");
  if (const auto* p = std::get_if<PcaDetector>(&cfg.detector); p && !(p->tau > 0.0 && p->tau <= 1.0)) {
    problems.push_back("detector.tau must be in (0,1]");
  }
  const auto* ext = std::get_if<ExternalDetector>(&cfg.detector);
  const bool wants_pot = std::find(cfg.methods.begin(), cfg.methods.end(), ThresholdMethod::Pot) != cfg.methods.end();
  if (ext && wants_pot && ext->train_pattern.empty()) {
    problems.push_back("POT on external scores needs detector.train_scores");
  }
  if (cfg.data_root.empty()) {
    problems.push_back(std::string("no data_root and ") + kDataRootEnv + " is not set");
  } else if (!fs::is_directory(cfg.data_root)) {
    problems.push_back("data_root " + cfg.data_root.string() + " is not a directory");
  } else {
    for (const auto& m : cfg.machines) {
      const auto p = machine_paths(cfg.data_root, m);
      for (const auto& f : {p.train, p.test, p.labels}) {
        if (!fs::exists(f)) problems.push_back("missing " + f.string());
      }
    }
  }
  if (!problems.empty()) {
    std::string msg = "invalid config:";
    for (const auto& p : problems) msg += "\n  " + p;
    config_error(msg);
  }
}

std::string cmd_summarize(const fs::path& data_root, const std::vector<std::string>& machines) {
  std::vector<std::string> missing;
  for (const auto& m : machines) {
    const auto p = machine_paths(data_root, m);
    for (const auto& f : {p.train, p.test, p.labels}) {
      if (!fs::exists(f)) missing.push_back(f.string());
    }
  }
  if (!missing.empty()) {
    std::string msg = std::to_string(missing.size()) + " missing file(s):";
    for (const auto& f : missing) msg += "\n  " + f;
    throw Error(ErrorCode::MissingFile, msg);
  }
  std::vector<DatasetSummary> rows(machines.size());
  std::vector<std::string> errors(machines.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(machines.size()); ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      rows[k] = summarize(load_machine(data_root, machines[k]));
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw Error(ErrorCode::ParseError, e);
  }
  return summary_csv(rows);
}

// ---------------------------------------------------------------------------

namespace {

struct MachineOutput {
  std::vector<CellRow> rows;
  std::vector<ThresholdRecord> thresholds;
  std::vector<CellFailure> failures;
};

bool is_external(const ExperimentConfig& cfg) { return std::holds_alternative<ExternalDetector>(cfg.detector); }

std::vector<double> gs_grid(const ExperimentConfig& cfg, const ScoreSeries& test) {
  const bool step = cfg.gs.kind == GridKind::Step || (cfg.gs.kind == GridKind::Auto && is_external(cfg));
  if (step) return grid_points(cfg.gs.range);
  LinSpace l = linspace_matching(test.values, cfg.gs.range);
  if (cfg.gs.count > 0) l.count = cfg.gs.count;
  return grid_points(l);
}

DetectorScores external_scores(const ExternalDetector& e, const std::string& machine, std::size_t run,
                               std::size_t n_labels, bool need_train) {
  DetectorScores s;
  s.test = load_scores(substitute(e.test_pattern, machine, run), e.orientation);
  if (s.test.size() != n_labels) {
    throw Error(ErrorCode::LengthMismatch, "test scores for " + machine + " run " + std::to_string(run) +
                                               " have " + std::to_string(s.test.size()) +
                                               " values, labels have " + std::to_string(n_labels));
  }
  if (need_train) s.train = load_scores(substitute(e.train_pattern, machine, run), e.orientation);
  return s;
}

void evaluate_cell(const ExperimentConfig& cfg, const MachineDataset& data,
                   const std::vector<AnomalySegment>& segments, std::size_t machine_index, std::size_t run,
                   const DetectorScores& scores, ThresholdMethod method, MachineOutput& out) {
  const auto emit = [&](double th, Protocol protocol) {
    const Mask pred = apply_threshold(scores.test, th);
    CellRow row;
    row.machine = data.machine_id;
    row.machine_index = machine_index;
    row.run = run;
    row.protocol = protocol;
    row.method = method;
    row.threshold = th;
    row.counts = evaluate_counts(pred, data.labels, segments, protocol);
    row.metrics = prf1(row.counts);
    row.segments = segment_metrics(pred, segments);
    out.rows.push_back(std::move(row));
  };

  if (method == ThresholdMethod::Pot) {
    PotConfig pc;
    pc.level = cfg.pot.level.value_or(default_pot_level(data.machine_id));
    pc.q = cfg.pot.q;
    pc.tail = tail_for(scores.train.orientation);
    const PotResult pot = pot_threshold(scores.train, pc);
    out.thresholds.push_back({data.machine_id, run, method, std::nullopt, pot.threshold, pot});
    for (auto p : cfg.protocols) emit(pot.threshold, p);
    return;
  }

  const auto grid = gs_grid(cfg, scores.test);
  if (cfg.gs.protocol) {
    const auto best = grid_search(scores.test, data.labels, grid, *cfg.gs.protocol);
    out.thresholds.push_back({data.machine_id, run, method, cfg.gs.protocol, best.threshold, std::nullopt});
    for (auto p : cfg.protocols) emit(best.threshold, p);
  } else {
    for (auto p : cfg.protocols) {
      const auto best = grid_search(scores.test, data.labels, grid, p);
      out.thresholds.push_back({data.machine_id, run, method, p, best.threshold, std::nullopt});
      emit(best.threshold, p);
    }
  }
}

MachineOutput run_machine(const ExperimentConfig& cfg, std::size_t machine_index) {
  MachineOutput out;
  const std::string& id = cfg.machines[machine_index];
  MachineDataset data;
  try {
    data = load_machine(cfg.data_root, id);
    data.validate();
  } catch (const std::exception& e) {
    out.failures.push_back({id, std::nullopt, "load", e.what()});
    return out;
  }
  const auto segments = segments_from_labels(data.labels);
  const bool need_train =
      std::find(cfg.methods.begin(), cfg.methods.end(), ThresholdMethod::Pot) != cfg.methods.end();

  std::optional<DetectorScores> fixed;
  for (std::size_t run = 0; run < cfg.runs; ++run) {
    DetectorScores scores;
    try {
      if (const auto* e = std::get_if<ExternalDetector>(&cfg.detector)) {
        scores = external_scores(*e, id, run, data.labels.size(), need_train);
      } else {
        // PCA and mean are deterministic: every run reuses the first run's scores.
        if (!fixed) {
          fixed = std::visit(
              [&](const auto& d) -> DetectorScores {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, ExternalDetector>) return {};
                else return run_detector(DetectorSpec{d}, data);
              },
              cfg.detector);
        }
        scores = *fixed;
      }
    } catch (const std::exception& e) {
      for (auto m : cfg.methods) out.failures.push_back({id, run, to_string(m), e.what()});
      continue;
    }
    for (auto method : cfg.methods) {
      try {
        MachineOutput cell;
        evaluate_cell(cfg, data, segments, machine_index, run, scores, method, cell);
        out.rows.insert(out.rows.end(), cell.rows.begin(), cell.rows.end());
        out.thresholds.insert(out.thresholds.end(), cell.thresholds.begin(), cell.thresholds.end());
      } catch (const std::exception& e) {
        out.failures.push_back({id, run, to_string(method), e.what()});
      }
    }
  }
  return out;
}

}  // namespace

RunReport execute(const ExperimentConfig& cfg, int jobs) {
  validate(cfg);
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
  std::vector<MachineOutput> outputs(cfg.machines.size());
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(cfg.machines.size()); ++i) {
    outputs[static_cast<std::size_t>(i)] = run_machine(cfg, static_cast<std::size_t>(i));
  }
  RunReport report;
  for (auto& o : outputs) {
    report.rows.insert(report.rows.end(), o.rows.begin(), o.rows.end());
    report.thresholds.insert(report.thresholds.end(), o.thresholds.begin(), o.thresholds.end());
    report.failures.insert(report.failures.end(), o.failures.begin(), o.failures.end());
  }
  return report;
}

// ---------------------------------------------------------------------------
// Reports

namespace {

std::string num(double v) { return io::format_double(v); }

using PanelKey = std::pair<Protocol, ThresholdMethod>;

std::vector<PanelKey> panel_keys(const ExperimentConfig& cfg) {
  std::vector<PanelKey> keys;
  for (auto p : cfg.protocols)
    for (auto m : cfg.methods) keys.emplace_back(p, m);
  return keys;
}

// Complete machines x runs grid for one (protocol, method); machines with any missing cell are
// left out.
struct PanelGrid {
  std::vector<std::string> machines;
  std::vector<std::vector<ConfusionCounts>> counts;
};

PanelGrid panel_grid(const RunReport& report, const ExperimentConfig& cfg, const PanelKey& key) {
  std::vector<std::vector<std::optional<ConfusionCounts>>> cells(
      cfg.machines.size(), std::vector<std::optional<ConfusionCounts>>(cfg.runs));
  for (const auto& r : report.rows) {
    if (r.protocol == key.first && r.method == key.second) cells[r.machine_index][r.run] = r.counts;
  }
  PanelGrid g;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (std::all_of(cells[i].begin(), cells[i].end(), [](const auto& c) { return c.has_value(); })) {
      g.machines.push_back(cfg.machines[i]);
      auto& row = g.counts.emplace_back();
      for (const auto& c : cells[i]) row.push_back(*c);
    }
  }
  return g;
}

json panel_json(const AggregatePanel& p) {
  json j;
  const auto metric = [&](double MetricTriple::*field) {
    json m;
    m["mean"] = p.mean.*field;
    m["sigma_runs"] = p.sigma_runs.*field;
    if (p.sigma_machines) m["sigma_machines"] = (*p.sigma_machines).*field;
    m["min"] = p.min.metrics.*field;
    m["max"] = p.max.metrics.*field;
    return m;
  };
  j["precision"] = metric(&MetricTriple::precision);
  j["recall"] = metric(&MetricTriple::recall);
  j["f1"] = metric(&MetricTriple::f1);
  j["sigma_runs_defined"] = p.sigma_runs_defined;
  if (p.sigma_machines) j["sigma_machines_defined"] = p.sigma_machines_defined;
  j["min_assignment"] = p.min.assignment;
  j["max_assignment"] = p.max.assignment;
  return j;
}

}  // namespace

std::string runs_csv(const RunReport& report) {
  std::ostringstream ss;
  ss << "machine,run,protocol,method,threshold,tp,fp,fn,tn,precision,recall,f1,"
        "episodes_detected,episodes_anomalous,segments_detected,segment_count,"
        "coverage_min,coverage_max,coverage_mean,coverage_std\n";
  for (const auto& r : report.rows) {
    ss << r.machine << ',' << r.run << ',' << to_string(r.protocol) << ',' << to_string(r.method) << ','
       << num(r.threshold) << ',' << r.counts.tp << ',' << r.counts.fp << ',' << r.counts.fn << ','
       << r.counts.tn << ',' << num(r.metrics.precision) << ',' << num(r.metrics.recall) << ','
       << num(r.metrics.f1) << ',' << r.segments.episodes_detected << ',' << r.segments.episodes_anomalous
       << ',' << r.segments.segments_detected << ',' << r.segments.segment_count << ','
       << num(r.segments.coverage.min) << ',' << num(r.segments.coverage.max) << ','
       << num(r.segments.coverage.mean) << ',' << num(r.segments.coverage.std) << '\n';
  }
  return ss.str();
}

std::string run_means_csv(const RunReport& report, const ExperimentConfig& cfg) {
  std::ostringstream ss;
  ss << "protocol,method,run,machines,average_precision,average_recall,average_f1,"
        "macro_precision,macro_recall,macro_f1,micro_precision,micro_recall,micro_f1\n";
  for (const auto& key : panel_keys(cfg)) {
    const PanelGrid g = panel_grid(report, cfg, key);
    if (g.machines.empty()) continue;
    const MetricGrid grid = MetricGrid::from_counts(g.counts);
    for (std::size_t j = 0; j < cfg.runs; ++j) {
      const Assignment a(grid.machines(), j);
      const auto av = assignment_metrics(grid, Strategy::Average, a);
      const auto ma = assignment_metrics(grid, Strategy::Macro, a);
      const auto mi = assignment_metrics(grid, Strategy::Micro, a);
      ss << to_string(key.first) << ',' << to_string(key.second) << ',' << j << ',' << grid.machines() << ','
         << num(av.precision) << ',' << num(av.recall) << ',' << num(av.f1) << ',' << num(ma.precision) << ','
         << num(ma.recall) << ',' << num(ma.f1) << ',' << num(mi.precision) << ',' << num(mi.recall) << ','
         << num(mi.f1) << '\n';
    }
  }
  return ss.str();
}

std::string machine_means_csv(const RunReport& report, const ExperimentConfig& cfg) {
  struct Acc {
    std::vector<double> p, r, f, cov_mean, cov_std;
    std::vector<double> ed, ea, sd;
    std::int64_t segs = 0;
  };
  std::map<std::tuple<std::size_t, int, int>, Acc> acc;
  for (const auto& row : report.rows) {
    auto& a = acc[{row.machine_index, static_cast<int>(row.protocol), static_cast<int>(row.method)}];
    a.p.push_back(row.metrics.precision);
    a.r.push_back(row.metrics.recall);
    a.f.push_back(row.metrics.f1);
    a.cov_mean.push_back(row.segments.coverage.mean);
    a.cov_std.push_back(row.segments.coverage.std);
    a.ed.push_back(static_cast<double>(row.segments.episodes_detected));
    a.ea.push_back(static_cast<double>(row.segments.episodes_anomalous));
    a.sd.push_back(static_cast<double>(row.segments.segments_detected));
    a.segs = row.segments.segment_count;
  }
  const auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
  };
  std::ostringstream ss;
  ss << "machine,protocol,method,runs,precision_mean,recall_mean,f1_mean,f1_sigma_runs,"
        "episodes_detected_mean,episodes_anomalous_mean,segments_detected_mean,segment_count,"
        "coverage_mean_mean,coverage_mean_sigma_runs,coverage_std_mean\n";
  for (const auto& [key, a] : acc) {
    const auto [mi, p, m] = key;
    ss << cfg.machines[mi] << ',' << to_string(static_cast<Protocol>(p)) << ','
       << to_string(static_cast<ThresholdMethod>(m)) << ',' << a.f.size() << ',' << num(mean(a.p)) << ','
       << num(mean(a.r)) << ',' << num(mean(a.f)) << ',' << num(sample_std(a.f)) << ',' << num(mean(a.ed))
       << ',' << num(mean(a.ea)) << ',' << num(mean(a.sd)) << ',' << a.segs << ',' << num(mean(a.cov_mean))
       << ',' << num(sample_std(a.cov_mean)) << ',' << num(mean(a.cov_std)) << '\n';
  }
  return ss.str();
}

std::string thresholds_json(const RunReport& report) {
  json arr = json::array();
  for (const auto& t : report.thresholds) {
    json j;
    j["machine"] = t.machine;
    j["run"] = t.run;
    j["method"] = to_string(t.method);
    if (t.selected_for) j["protocol"] = to_string(*t.selected_for);
    j["th"] = t.threshold;
    if (t.pot) {
      j["gamma"] = t.pot->fit.gamma;
      j["beta"] = t.pot->fit.beta;
      j["level"] = t.pot->level;
      j["q"] = t.pot->q;
      j["N'"] = t.pot->fit.total_count;
      j["N'_th"] = t.pot->fit.exceedance_count;
      j["initial_th"] = t.pot->fit.initial_threshold;
    } else {
      j["gamma"] = nullptr;
      j["beta"] = nullptr;
      j["level"] = nullptr;
      j["q"] = nullptr;
      j["N'"] = nullptr;
      j["N'_th"] = nullptr;
    }
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

std::string aggregate_json(const RunReport& report, const ExperimentConfig& cfg) {
  json root;
  root["runs"] = cfg.runs;
  root["seed"] = cfg.seed;
  root["restarts"] = cfg.restarts;
  json panels = json::array();
  const ExtremeSearchOptions opts{cfg.restarts, cfg.seed};
  for (const auto& key : panel_keys(cfg)) {
    const PanelGrid g = panel_grid(report, cfg, key);
    json p;
    p["protocol"] = to_string(key.first);
    p["method"] = to_string(key.second);
    p["machines"] = g.machines;
    if (!g.machines.empty()) {
      const MetricGrid grid = MetricGrid::from_counts(g.counts);
      for (auto s : {Strategy::Average, Strategy::Macro, Strategy::Micro}) {
        p[to_string(s)] = panel_json(aggregate(grid, s, opts));
      }
    }
    panels.push_back(std::move(p));
  }
  root["panels"] = std::move(panels);
  json failures = json::array();
  for (const auto& f : report.failures) {
    json j;
    j["machine"] = f.machine;
    if (f.run) j["run"] = *f.run;
    else j["run"] = nullptr;
    j["stage"] = f.method;
    j["error"] = f.message;
    failures.push_back(std::move(j));
  }
  root["failures"] = std::move(failures);
  return root.dump(2) + "\n";
}

RunOutcome cmd_run(const ExperimentConfig& cfg, int jobs) {
  const RunReport report = execute(cfg, jobs);
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + cfg.output_dir.string() + ": " + ec.message());
  io::write_file_atomic(cfg.output_dir / "runs.csv", runs_csv(report));
  io::write_file_atomic(cfg.output_dir / "run_means.csv", run_means_csv(report, cfg));
  io::write_file_atomic(cfg.output_dir / "machine_means.csv", machine_means_csv(report, cfg));
  io::write_file_atomic(cfg.output_dir / "thresholds.json", thresholds_json(report));
  io::write_file_atomic(cfg.output_dir / "aggregate.json", aggregate_json(report, cfg));
  RunOutcome out;
  out.cells = report.rows.size();
  out.failures = report.failures.size();
  out.exit_code = report.failures.empty() ? 0 : 1;
  return out;
}

// ---------------------------------------------------------------------------

std::vector<SynthConfig> parse_synth_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    config_error(std::string("synth config is not valid YAML: ") + e.what());
  }
  const YAML::Node node = root["synth"] ? root["synth"] : root;
  if (!node.IsMap()) config_error("synth config must be a mapping");

  SynthConfig base;
  const auto get = [&node](const char* key, auto& field) {
    if (node[key]) field = scalar<std::decay_t<decltype(field)>>(node[key], key);
  };
  get("channels", base.channels);
  get("train_length", base.train_length);
  get("test_length", base.test_length);
  get("rank", base.rank);
  get("noise", base.noise);
  get("segment_count", base.segment_count);
  get("segment_min", base.segment_min);
  get("segment_max", base.segment_max);
  get("magnitude", base.magnitude);
  get("seed", base.seed);

  std::vector<std::string> ids;
  if (node["machines"]) {
    for (const auto& m : node["machines"]) ids.push_back(scalar<std::string>(m, "machines"));
  } else {
    std::size_t count = 1;
    get("count", count);
    for (std::size_t i = 0; i < count; ++i) ids.push_back("synth-" + std::to_string(i + 1));
  }
  std::vector<SynthConfig> out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    SynthConfig c = base;
    c.machine_id = ids[i];
    c.seed = base.seed + i;
    out.push_back(c);
  }
  return out;
}

std::vector<SynthConfig> load_synth_config(const fs::path& path) {
  std::string text;
  try {
    text = io::read_text_file(path);
  } catch (const Error& e) {
    config_error(e.what());
  }
  return parse_synth_config(text);
}

void cmd_synth(const std::vector<SynthConfig>& machines, const fs::path& out_dir) {
  for (const auto& m : machines) write_machine(out_dir, generate_synthetic(m).dataset);
}

}  // namespace tsad::pipeline
