#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tsad/io.hpp"
#include "tsad/pipeline.hpp"

using namespace tsad;
using namespace tsad::pipeline;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            (std::string("tsad_pipe_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::vector<std::string> synth_ids(std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 1; i <= n; ++i) ids.push_back("synth-" + std::to_string(i));
  return ids;
}

void make_data(const fs::path& root, std::size_t machines) {
  cmd_synth(parse_synth_config("count: " + std::to_string(machines) + "\ntest_length: 1500\ntrain_length: 1500\n"),
            root);
}

ExperimentConfig base_config(const fs::path& root, std::size_t machines) {
  ExperimentConfig cfg;
  cfg.data_root = root / "data";
  cfg.machines = synth_ids(machines);
  cfg.output_dir = root / "out";
  return cfg;
}

std::vector<std::vector<std::string>> read_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST(Config, ParsesAllSections) {
  const auto cfg = parse_experiment_config(R"(
data_root: smd
machines: [1-1, 2-8]
detector: {type: pca, tau: 0.7, mode: major}
threshold:
  methods: [gs]
  pot: {q: 0.001, level: 0.01}
  gs: {grid: step, lo: -400, hi: 400, step: 2, protocol: matched}
protocols: [pointwise]
runs: 4
seed: 9
restarts: 32
output: results
)",
                                           "/base");
  EXPECT_EQ(cfg.data_root, fs::path("/base/smd"));
  EXPECT_EQ(cfg.machines, (std::vector<std::string>{"1-1", "2-8"}));
  const auto& p = std::get<PcaDetector>(cfg.detector);
  EXPECT_EQ(p.tau, 0.7);
  EXPECT_EQ(p.mode, PcaMode::Major);
  EXPECT_EQ(cfg.methods, (std::vector<ThresholdMethod>{ThresholdMethod::GridSearch}));
  EXPECT_EQ(cfg.pot.q, 0.001);
  EXPECT_EQ(cfg.pot.level, 0.01);
  EXPECT_EQ(cfg.gs.kind, GridKind::Step);
  EXPECT_EQ(cfg.gs.range.step, 2.0);
  EXPECT_FALSE(cfg.gs.protocol.has_value());
  EXPECT_EQ(cfg.protocols, (std::vector<Protocol>{Protocol::PointWise}));
  EXPECT_EQ(cfg.runs, 4u);
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_EQ(cfg.restarts, 32u);
  EXPECT_EQ(cfg.output_dir, fs::path("/base/results"));
}

TEST(Config, Defaults) {
  const auto cfg = parse_experiment_config("data_root: /d\n", "");
  EXPECT_EQ(cfg.machines.size(), 28u);
  EXPECT_EQ(std::get<PcaDetector>(cfg.detector).tau, 0.5);
  EXPECT_EQ(cfg.pot.q, 1e-4);
  EXPECT_FALSE(cfg.pot.level.has_value());
  EXPECT_EQ(cfg.gs.range.lo, -10000.0);
  EXPECT_EQ(cfg.gs.range.hi, 1000.0);
  EXPECT_EQ(cfg.gs.range.step, 1.0);
  EXPECT_EQ(cfg.runs, 1u);
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(parse_experiment_config("detector: {type: lstm}\n", ""), Error);
  EXPECT_THROW(parse_experiment_config("runs: [1]\n", ""), Error);
  EXPECT_THROW(parse_experiment_config(": : :\n  -", ""), Error);
  TempDir dir;
  auto cfg = base_config(dir.path(), 1);
  fs::create_directories(cfg.data_root);
  cfg.runs = 0;
  try {
    validate(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidConfig);
    EXPECT_NE(std::string(e.what()).find("runs"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("missing"), std::string::npos);
  }
}

TEST(Summarize, MissingFilesListedTogether) {
  TempDir dir;
  try {
    cmd_summarize(dir.path(), {"1-1", "2-8"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingFile);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("6 missing"), std::string::npos) << msg;
    EXPECT_NE(msg.find("machine-2-8.txt"), std::string::npos) << msg;
  }
}

TEST(Summarize, SyntheticMatchesGeneratorTruth) {
  TempDir dir;
  const auto cfgs = parse_synth_config("machines: [a, b]\nseed: 5\n");
  cmd_synth(cfgs, dir.path());
  const auto rows = read_csv(cmd_summarize(dir.path(), {"a", "b"}));
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto truth = generate_synthetic(cfgs[i]);
    std::size_t points = 0;
    for (const auto& s : truth.segments) points += s.length();
    EXPECT_EQ(rows[i + 1][0], cfgs[i].machine_id);
    EXPECT_EQ(rows[i + 1][3], std::to_string(points));
    EXPECT_EQ(rows[i + 1][5], std::to_string(truth.segments.size()));
  }
  EXPECT_EQ(rows[3][0], "All");
}

TEST(Synth, ConfigSeedsPerMachine) {
  const auto c = parse_synth_config("synth:\n  count: 3\n  seed: 10\n  channels: 5\n  magnitude: 0\n");
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[0].machine_id, "synth-1");
  EXPECT_EQ(c[2].seed, 12u);
  EXPECT_EQ(c[1].channels, 5u);
  EXPECT_EQ(c[1].magnitude, 0.0);
}

TEST(Run, PcaGridSearchSeparatesSyntheticData) {
  TempDir dir;
  make_data(dir.path() / "data", 2);
  auto cfg = base_config(dir.path(), 2);
  cfg.methods = {ThresholdMethod::GridSearch};
  cfg.protocols = {Protocol::PointAdjusted};
  const auto rep = execute(cfg, 2);
  ASSERT_TRUE(rep.failures.empty());
  ASSERT_EQ(rep.rows.size(), 2u);
  for (const auto& r : rep.rows) EXPECT_EQ(r.metrics.f1, 1.0);
}

TEST(Run, MeanDetectorRowsIdenticalAcrossRuns) {
  TempDir dir;
  make_data(dir.path() / "data", 2);
  auto cfg = base_config(dir.path(), 2);
  cfg.detector = MeanDetector{};
  cfg.runs = 5;
  cfg.protocols = {Protocol::PointWise};
  cfg.methods = {ThresholdMethod::Pot};
  const auto rep = execute(cfg, 0);
  ASSERT_TRUE(rep.failures.empty());
  ASSERT_EQ(rep.rows.size(), 10u);
  for (std::size_t m = 0; m < 2; ++m)
    for (std::size_t j = 1; j < 5; ++j) {
      const auto& a = rep.rows[m * 5];
      const auto& b = rep.rows[m * 5 + j];
      EXPECT_EQ(b.run, j);
      EXPECT_EQ(a.counts, b.counts);
      EXPECT_EQ(a.threshold, b.threshold);
    }
}

TEST(Run, ExternalWrongLengthIsCellError) {
  TempDir dir;
  make_data(dir.path() / "data", 2);
  const auto good = load_machine(dir.path() / "data", "synth-1");
  ScoreSeries s{std::vector<double>(good.labels.size(), 0.0), Orientation::LowerAnomalous};
  for (std::size_t t = 0; t < s.size(); ++t) s.values[t] = good.labels[t] ? -5.0 : 1.0;
  fs::create_directories(dir.path() / "scores");
  write_scores(dir.path() / "scores" / "synth-1_0.txt", s);
  s.values.pop_back();
  write_scores(dir.path() / "scores" / "synth-2_0.txt", s);

  auto cfg = base_config(dir.path(), 2);
  ExternalDetector ext;
  ext.test_pattern = (dir.path() / "scores" / "{machine}_{run}.txt").string();
  cfg.detector = ext;
  cfg.methods = {ThresholdMethod::GridSearch};
  cfg.gs.range = {-10, 10, 1};
  const auto out = cmd_run(cfg, 2);
  EXPECT_EQ(out.exit_code, 1);
  EXPECT_EQ(out.failures, 1u);
  const auto rep = execute(cfg, 2);
  ASSERT_EQ(rep.failures.size(), 1u);
  EXPECT_EQ(rep.failures[0].machine, "synth-2");
  EXPECT_NE(rep.failures[0].message.find("labels"), std::string::npos) << rep.failures[0].message;
  ASSERT_EQ(rep.rows.size(), 2u);
  for (const auto& r : rep.rows) {
    EXPECT_EQ(r.machine, "synth-1");
    EXPECT_EQ(r.metrics.f1, 1.0);
  }
}

TEST(Run, ByteIdenticalAcrossInvocationsAndThreadCounts) {
  TempDir dir;
  make_data(dir.path() / "data", 3);
  auto cfg = base_config(dir.path(), 3);
  cfg.runs = 3;
  std::vector<std::string> first;
  const char* files[] = {"runs.csv", "run_means.csv", "machine_means.csv", "thresholds.json", "aggregate.json"};
  for (int jobs : {1, 4, 1}) {
    ASSERT_EQ(cmd_run(cfg, jobs).exit_code, 0);
    std::vector<std::string> now;
    for (const char* f : files) now.push_back(io::read_text_file(cfg.output_dir / f));
    if (first.empty()) first = now;
    else EXPECT_EQ(now, first);
  }
  for (const char* f : files) {
    fs::path tmp = cfg.output_dir / f;
    tmp += ".tmp";
    EXPECT_FALSE(fs::exists(tmp));
  }
}

TEST(Run, AggregateAverageMatchesRunMeans) {
  TempDir dir;
  make_data(dir.path() / "data", 3);
  auto cfg = base_config(dir.path(), 3);
  cfg.detector = MeanDetector{};
  cfg.runs = 2;
  ASSERT_EQ(cmd_run(cfg, 0).exit_code, 0);
  const auto agg = nlohmann::json::parse(io::read_text_file(cfg.output_dir / "aggregate.json"));
  const auto rows = read_csv(io::read_text_file(cfg.output_dir / "run_means.csv"));
  const auto& header = rows[0];
  const auto col = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
  };
  std::size_t checked = 0;
  for (const auto& panel : agg["panels"]) {
    double sum = 0;
    int n = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i][col("protocol")] == panel["protocol"] && rows[i][col("method")] == panel["method"]) {
        sum += std::stod(rows[i][col("average_f1")]);
        ++n;
      }
    }
    ASSERT_EQ(n, 2);
    EXPECT_NEAR(panel["average"]["f1"]["mean"].get<double>(), sum / n, 1e-12);
    ++checked;
  }
  EXPECT_EQ(checked, 4u);
}

TEST(Run, ThresholdRecordsCarryPotFields) {
  TempDir dir;
  make_data(dir.path() / "data", 1);
  auto cfg = base_config(dir.path(), 1);
  cfg.methods = {ThresholdMethod::Pot};
  ASSERT_EQ(cmd_run(cfg, 1).exit_code, 0);
  const auto th = nlohmann::json::parse(io::read_text_file(cfg.output_dir / "thresholds.json"));
  ASSERT_EQ(th.size(), 1u);
  for (const char* key : {"method", "th", "gamma", "beta", "level", "q", "N'", "N'_th"}) {
    EXPECT_TRUE(th[0].contains(key)) << key;
  }
  EXPECT_EQ(th[0]["level"].get<double>(), 0.005);
  EXPECT_EQ(th[0]["q"].get<double>(), 1e-4);
}
