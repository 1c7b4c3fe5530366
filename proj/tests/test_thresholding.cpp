#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "oracles.hpp"
#include "tsad/thresholding.hpp"

using namespace tsad;

namespace {

std::vector<double> gpd_sample(double gamma, double beta, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> out;
  while (out.size() < n) {
    const double v = u(rng);
    if (!(v > 0.0 && v < 1.0)) continue;
    out.push_back(gamma == 0.0 ? -beta * std::log(v) : beta * (std::pow(v, -gamma) - 1.0) / gamma);
  }
  return out;
}

GpdFit injected(double gamma, double beta) {
  GpdFit f;
  f.gamma = gamma;
  f.beta = beta;
  f.total_count = 10000;
  f.exceedance_count = 100;
  f.initial_threshold = 10.0;
  return f;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no tsad::Error thrown";
  return ErrorCode::IoError;
}

}  // namespace

TEST(Gpd, RecoversExponential) {
  const auto y = gpd_sample(0.0, 2.0, 50000, 1);
  const auto p = fit_gpd(y);
  EXPECT_GE(p.gamma, -0.05);
  EXPECT_LE(p.gamma, 0.05);
  EXPECT_GE(p.beta, 1.9);
  EXPECT_LE(p.beta, 2.1);
}

TEST(Gpd, RecoversHeavyTail) {
  const auto p = fit_gpd(gpd_sample(0.5, 1.0, 50000, 2));
  EXPECT_NEAR(p.gamma, 0.5, 0.05);
  EXPECT_NEAR(p.beta, 1.0, 0.1);
}

TEST(Gpd, RecoversBoundedTail) {
  const auto p = fit_gpd(gpd_sample(-0.2, 1.0, 50000, 3));
  EXPECT_NEAR(p.gamma, -0.2, 0.05);
  EXPECT_NEAR(p.beta, 1.0, 0.05);
}

TEST(Gpd, ConvergesToSmallGradient) {
  const auto r = fit_gpd_report(gpd_sample(0.3, 1.5, 5000, 4));
  EXPECT_LE(r.iterations, 500u);
  EXPECT_LE(std::abs(r.gradient), 1e-6);
}

TEST(Gpd, BeatsRandomAdmissiblePairs) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const double true_gamma = -0.3 + 0.2 * static_cast<double>(seed);
    const auto y = gpd_sample(true_gamma, 1.0, 2000, 10 + seed);
    const auto p = fit_gpd(y);
    const double best = gpd_log_likelihood(y, p.gamma, p.beta);
    ASSERT_TRUE(std::isfinite(best));
    const double ymax = *std::max_element(y.begin(), y.end());
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> g(-1.0, 2.0), b(0.01, 5.0);
    int tried = 0;
    while (tried < 100) {
      const double gamma = g(rng), beta = b(rng);
      if (!(1.0 + gamma * ymax / beta > 0.0)) continue;
      ++tried;
      EXPECT_GE(best, gpd_log_likelihood(y, gamma, beta));
    }
  }
}

TEST(Gpd, Errors) {
  EXPECT_EQ(code_of([] { fit_gpd(std::vector<double>{1.0}); }), ErrorCode::TooFewExceedances);
  EXPECT_EQ(code_of([] { fit_gpd(std::vector<double>{2.0, 2.0}); }), ErrorCode::DegenerateExceedances);
  EXPECT_EQ(code_of([] { fit_gpd(std::vector<double>{1.0, -1.0}); }), ErrorCode::InvalidArgument);
}

TEST(Gpd, LikelihoodOutsideSupport) {
  const std::vector<double> y{1.0, 3.0};
  EXPECT_EQ(gpd_log_likelihood(y, -0.5, 1.0), -std::numeric_limits<double>::infinity());
  EXPECT_EQ(gpd_log_likelihood(y, 0.1, 0.0), -std::numeric_limits<double>::infinity());
  EXPECT_DOUBLE_EQ(gpd_log_likelihood(y, 0.0, 2.0), -2 * std::log(2.0) - 2.0);
}

TEST(Pot, HandCase) {
  EXPECT_NEAR(pot_final_threshold(injected(0.5, 2.0), 1e-4, Tail::Lower), -26.0, 1e-9);
  EXPECT_NEAR(pot_final_threshold(injected(0.5, 2.0), 1e-4, Tail::Upper), 46.0, 1e-9);
}

TEST(Pot, ExponentialLimit) {
  const double limit = 10.0 + 2.0 * std::log(100.0 / (1e-4 * 10000.0));
  EXPECT_NEAR(pot_final_threshold(injected(1e-9, 2.0), 1e-4, Tail::Upper), limit, 1e-3);
  EXPECT_NEAR(pot_final_threshold(injected(0.0, 2.0), 1e-4, Tail::Upper), limit, 1e-12);
}

TEST(Pot, FixedPointWhenQMatchesTailFraction) {
  EXPECT_EQ(pot_final_threshold(injected(0.5, 2.0), 0.01, Tail::Upper), 10.0);
  EXPECT_EQ(pot_final_threshold(injected(-0.3, 2.0), 0.01, Tail::Lower), 10.0);
}

TEST(Pot, EndToEndBothTails) {
  auto y = gpd_sample(0.1, 1.0, 20000, 5);
  ScoreSeries upper{y, Orientation::HigherAnomalous};
  const auto up = pot_threshold(upper, {0.02, 1e-4, Tail::Upper});
  EXPECT_EQ(up.fit.total_count, 20000u);
  EXPECT_EQ(up.fit.exceedance_count, 400u);
  EXPECT_GT(up.threshold, up.fit.initial_threshold);

  ScoreSeries lower{y, Orientation::LowerAnomalous};
  for (auto& v : lower.values) v = -v;
  const auto lo = pot_threshold(lower, {0.02, 1e-4, Tail::Lower});
  EXPECT_EQ(lo.fit.initial_threshold, -up.fit.initial_threshold);
  EXPECT_EQ(lo.fit.exceedance_count, up.fit.exceedance_count);
  EXPECT_NEAR(lo.threshold, -up.threshold, 1e-9 * std::abs(up.threshold));
}

TEST(Pot, Errors) {
  ScoreSeries flat{std::vector<double>(100, 1.0), Orientation::HigherAnomalous};
  EXPECT_EQ(code_of([&] { pot_threshold(flat, {0.05, 1e-4, Tail::Upper}); }), ErrorCode::NoExceedances);
  ScoreSeries s{{1, 2, 3, 4}, Orientation::HigherAnomalous};
  EXPECT_EQ(code_of([&] { pot_threshold(s, {0.25, 1e-4, Tail::Lower}); }), ErrorCode::InvalidArgument);
}

TEST(Pot, GroupDefaults) {
  EXPECT_EQ(default_pot_level("1-4"), 0.005);
  EXPECT_EQ(default_pot_level("2-8"), 0.0075);
  EXPECT_EQ(default_pot_level("3-11"), 0.0001);
}

// ---------------------------------------------------------------------------

TEST(ApplyThreshold, Examples) {
  EXPECT_EQ(apply_threshold({{5, -2, 7}, Orientation::HigherAnomalous}, 0.0), (Mask{1, 0, 1}));
  EXPECT_EQ(apply_threshold({{5, -2, 7}, Orientation::LowerAnomalous}, 0.0), (Mask{0, 1, 0}));
  EXPECT_EQ(apply_threshold({{3}, Orientation::HigherAnomalous}, 3.0), (Mask{0}));
  EXPECT_EQ(apply_threshold({{3}, Orientation::LowerAnomalous}, 3.0), (Mask{0}));
}

TEST(ApplyThreshold, Monotone) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0, 1);
  ScoreSeries s{{}, Orientation::HigherAnomalous};
  for (int i = 0; i < 300; ++i) s.values.push_back(n(rng));
  long prev = 301;
  for (double th = -4; th <= 4; th += 0.05) {
    const auto m = apply_threshold(s, th);
    const long c = std::count(m.begin(), m.end(), 1);
    EXPECT_LE(c, prev);
    prev = c;
  }
}

TEST(Grid, StepRangeDefaults) {
  const StepRange r;
  EXPECT_EQ(point_count(r), 11001u);
  const auto pts = grid_points(r);
  EXPECT_EQ(pts.front(), -10000.0);
  EXPECT_EQ(pts.back(), 1000.0);
}

TEST(Grid, LinSpaceMatchesCount) {
  const std::vector<double> s{3.0, -1.0, 7.5};
  const auto l = linspace_matching(s, StepRange{-400, 400, 1});
  EXPECT_EQ(l.lo, -1.0);
  EXPECT_EQ(l.hi, 7.5);
  EXPECT_EQ(l.count, 801u);
  const auto pts = grid_points(l);
  EXPECT_EQ(pts.size(), 801u);
  EXPECT_EQ(pts.back(), 7.5);
}

TEST(GridSearch, PerfectSeparation) {
  const auto r = grid_search({{0, 1, 2, 3}, Orientation::HigherAnomalous}, Mask{0, 0, 1, 1},
                             std::vector<double>{0.5, 1.5, 2.5}, Protocol::PointWise);
  EXPECT_EQ(r.threshold, 1.5);
  EXPECT_EQ(r.metrics.f1, 1.0);
}

TEST(GridSearch, AllNormalPicksLargest) {
  const auto r = grid_search({{0, 1, 2, 3}, Orientation::HigherAnomalous}, Mask{0, 0, 0, 0},
                             std::vector<double>{0.5, 1.5, 2.5}, Protocol::PointWise);
  EXPECT_EQ(r.metrics.f1, 0.0);
  EXPECT_EQ(r.threshold, 2.5);
  const auto lower = grid_search({{0, 1, 2, 3}, Orientation::LowerAnomalous}, Mask{0, 0, 0, 0},
                                 std::vector<double>{0.5, 1.5, 2.5}, Protocol::PointWise);
  EXPECT_EQ(lower.threshold, 0.5);
}

TEST(GridSearch, Errors) {
  ScoreSeries s{{1, 2}, Orientation::HigherAnomalous};
  EXPECT_EQ(code_of([&] { grid_search(s, Mask{0, 1}, std::vector<double>{}, Protocol::PointWise); }),
            ErrorCode::EmptyGrid);
  EXPECT_EQ(code_of([&] { grid_search(s, Mask{0}, std::vector<double>{1.0}, Protocol::PointWise); }),
            ErrorCode::LengthMismatch);
}

TEST(GridSearch, MatchesExhaustiveOracle) {
  std::mt19937_64 rng(14);
  std::normal_distribution<double> n(0, 1);
  for (int rep = 0; rep < 60; ++rep) {
    const auto y = oracle::random_labels(rng, 200, 0.02, 20);
    ScoreSeries s{{}, rep % 2 ? Orientation::LowerAnomalous : Orientation::HigherAnomalous};
    std::vector<double> higher;
    for (int v : y) {
      const double h = n(rng) + (v ? 1.5 : 0.0);
      higher.push_back(h);
      s.values.push_back(rep % 2 ? -h : h);
    }
    std::vector<double> grid;
    for (int g = 0; g < 20; ++g) grid.push_back(-2.0 + 0.25 * g);
    std::vector<double> oracle_grid = grid;
    if (rep % 2) {
      for (auto& g : oracle_grid) g = -g;
    }
    const Mask labels(y.begin(), y.end());
    for (auto p : {Protocol::PointAdjusted, Protocol::PointWise}) {
      const auto r = grid_search(s, labels, grid, p);
      EXPECT_EQ(r.metrics.f1, oracle::best_f1(higher, y, oracle_grid, p == Protocol::PointAdjusted));
      EXPECT_EQ(r.threshold, grid[r.index]);
    }
  }
}

TEST(GridSearch, DominatesSnappedPotThreshold) {
  std::mt19937_64 rng(15);
  std::normal_distribution<double> n(0, 1);
  for (int rep = 0; rep < 20; ++rep) {
    const auto y = oracle::random_labels(rng, 1000, 0.005, 40);
    ScoreSeries train{{}, Orientation::HigherAnomalous}, test{{}, Orientation::HigherAnomalous};
    for (int i = 0; i < 1000; ++i) train.values.push_back(std::abs(n(rng)));
    for (int v : y) test.values.push_back(std::abs(n(rng)) + (v ? 2.0 : 0.0));
    const auto pot = pot_threshold(train, {0.05, 1e-3, Tail::Upper});
    const auto grid = grid_points(LinSpace{0.0, 8.0, 81});
    std::size_t nearest = 0;
    for (std::size_t g = 0; g < grid.size(); ++g)
      if (std::abs(grid[g] - pot.threshold) < std::abs(grid[nearest] - pot.threshold)) nearest = g;
    const Mask labels(y.begin(), y.end());
    const auto segs = segments_from_labels(labels);
    for (auto p : {Protocol::PointAdjusted, Protocol::PointWise}) {
      const auto gs = grid_search(test, labels, grid, p);
      const auto at_pot = prf1(evaluate_counts(apply_threshold(test, grid[nearest]), labels, segs, p));
      EXPECT_GE(gs.metrics.f1, at_pot.f1);
    }
  }
}
