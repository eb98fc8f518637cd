#include <cmath>
#include <vector>

#include "doctest.h"
#include "gsest/case_study.hpp"
#include "gsest/errors.hpp"
#include "gsest/simulation.hpp"

using namespace gsest;

TEST_CASE("stop_probability spot values") {
  const TwoStageDesign d = musec::design();
  CHECK(stop_probability(0.10, d) == doctest::Approx(0.1519).epsilon(1e-3));
  CHECK(stop_probability(0.14, d) == doctest::Approx(0.3741).epsilon(1e-3));
  CHECK(stop_probability(0.18, d) == doctest::Approx(0.6504).epsilon(1e-3));
}

TEST_CASE("simulate_replicate basics") {
  const TwoStageDesign d = musec::design();
  // an enormous effect always stops at the interim
  const auto params_huge = canonical_params(5.0, d);
  for (std::uint64_t r = 0; r < 50; ++r) {
    ReplicateRng rng(3, r);
    const auto rec = simulate_replicate(rng, params_huge, d);
    CHECK(rec.stopped_stage == 1);
    CHECK_FALSE(rec.z2.has_value());
  }
  // fixed seed reproduces the identical record sequence
  const auto params = canonical_params(0.14, d);
  for (std::uint64_t r = 0; r < 20; ++r) {
    ReplicateRng rng_a(42, r);
    ReplicateRng rng_b(42, r);
    const auto a = simulate_replicate(rng_a, params, d);
    const auto b = simulate_replicate(rng_b, params, d);
    CHECK(a.z1 == b.z1);
    CHECK(a.stopped_stage == b.stopped_stage);
    CHECK(a.estimates.mle_overall == b.estimates.mle_overall);
  }
}

TEST_CASE("canonical pair correlation matches the design") {
  const TwoStageDesign d = musec::design();
  const auto params = canonical_params(0.14, d);
  const std::uint64_t n = 1000000;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::uint64_t r = 0; r < n; ++r) {
    ReplicateRng rng(5, r);
    const auto [z1, z2] = draw_canonical_pair(rng, params);
    sx += z1;
    sy += z2;
    sxx += z1 * z1;
    syy += z2 * z2;
    sxy += z1 * z2;
  }
  const double nn = static_cast<double>(n);
  const double cov = sxy / nn - (sx / nn) * (sy / nn);
  const double vx = sxx / nn - (sx / nn) * (sx / nn);
  const double vy = syy / nn - (sy / nn) * (sy / nn);
  const double corr = cov / std::sqrt(vx * vy);
  CHECK(std::fabs(corr - params.rho) < 3.0 / std::sqrt(nn));
  CHECK(std::fabs(sx / nn - params.mu1) < 4.0 / std::sqrt(nn));
  CHECK(std::fabs(sy / nn - params.mu2) < 4.0 / std::sqrt(nn));
}

TEST_CASE("run_scenario unconditioned summary") {
  const TwoStageDesign d = musec::design();
  Scenario sc{0.14, d, 20000, 11, Conditioning::all};
  const auto s = run_scenario(sc);

  CHECK(s.n_stage1 + s.n_stage2 == 20000);
  CHECK(std::fabs(s.empirical_stop_probability - s.analytic_stop_probability) <
        4.0 * std::sqrt(0.374 * 0.626 / 20000.0));

  const int overall_idx = static_cast<int>(Estimator::mle_overall);
  CHECK(std::fabs(*s.overall[overall_idx].mean - 0.144) < 3e-3);
  CHECK(std::fabs(*s.overall[overall_idx].sd - 0.054) < 4e-3);
  // unconditional UMVUE mean equals theta
  const int umvue_idx = static_cast<int>(Estimator::umvue);
  CHECK(std::fabs(*s.overall[umvue_idx].mean - 0.14) <
        4.0 * *s.overall[umvue_idx].sd / std::sqrt(20000.0));
  // conditional estimators only accumulate on stage-2 continuers
  const int cbc_idx = static_cast<int>(Estimator::cbc_mle);
  CHECK(s.overall[cbc_idx].n == s.n_stage2);
  CHECK(s.stage1_stoppers[cbc_idx].n == 0);
}

TEST_CASE("run_scenario stage2_only conditioning") {
  const TwoStageDesign d = musec::design();
  Scenario sc{0.14, d, 20000, 13, Conditioning::stage2_only};
  const auto s = run_scenario(sc);
  CHECK(s.n_stage1 == 0);
  CHECK(s.n_stage2 == 20000);
  CHECK(s.empirical_stop_probability == 0.0);
  const int umvcue_idx = static_cast<int>(Estimator::umvcue);
  CHECK(std::fabs(*s.overall[umvcue_idx].mean - 0.14) <
        4.0 * *s.overall[umvcue_idx].sd / std::sqrt(20000.0));
}

TEST_CASE("run_scenario stage1_only conditioning") {
  const TwoStageDesign d = musec::design();
  Scenario sc{0.10, d, 5000, 17, Conditioning::stage1_only};
  const auto s = run_scenario(sc);
  CHECK(s.n_stage1 == 5000);
  CHECK(s.n_stage2 == 0);
  const int s1_idx = static_cast<int>(Estimator::mle_stage1);
  CHECK(std::fabs(*s.stage1_stoppers[s1_idx].mean - 0.188) < 3e-3);
}

TEST_CASE("run_scenario is invariant to the worker count") {
  const TwoStageDesign d = musec::design();
  Scenario sc{0.14, d, 30000, 123, Conditioning::all};
  const auto one = run_scenario(sc, nullptr, 1);
  const auto four = run_scenario(sc, nullptr, 4);
  for (int e = 0; e < kNumEstimators; ++e) {
    CHECK(one.overall[e].n == four.overall[e].n);
    if (one.overall[e].mean.has_value()) {
      CHECK(*one.overall[e].mean == *four.overall[e].mean);
      CHECK(*one.overall[e].sd == *four.overall[e].sd);
    }
  }
  CHECK(one.n_stage1 == four.n_stage1);
}

TEST_CASE("run_scenario starves on an impossible conditioning event") {
  const TwoStageDesign d = musec::design();
  // stopping at the interim is a ~infeasible event for a huge negative effect
  Scenario sc{-2.0, d, 100, 19, Conditioning::stage1_only};
  CHECK_THROWS_AS((void)run_scenario(sc), StarvationError);
}

TEST_CASE("single replicate leaves the SD absent") {
  const TwoStageDesign d = musec::design();
  Scenario sc{0.14, d, 1, 23, Conditioning::all};
  const auto s = run_scenario(sc);
  const int overall_idx = static_cast<int>(Estimator::mle_overall);
  CHECK(s.overall[overall_idx].n == 1);
  CHECK(s.overall[overall_idx].mean.has_value());
  CHECK_FALSE(s.overall[overall_idx].sd.has_value());
}

TEST_CASE("scenario validation") {
  const TwoStageDesign d = musec::design();
  Scenario sc{0.14, d, 0, 1, Conditioning::all};
  CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
}

TEST_CASE("bootstrap_se matches the published SE column") {
  // tolerances widened for the reduced replicate count used here; the
  // acceptance suite runs the full 1e5.
  const TwoStageDesign d = musec::design();
  const auto se = bootstrap_se(d, 0.14, 20000, 7);
  const auto& ref = musec::reference_estimates();
  for (int e = 0; e < kNumEstimators; ++e) {
    REQUIRE(se[e].has_value());
    CHECK(std::fabs(*se[e] - ref[e].se) < 5e-3);
  }
  CHECK_THROWS_AS((void)bootstrap_se(d, 0.14, 1, 7), std::invalid_argument);
}

TEST_CASE("bootstrap_se with two replicates is the two-draw SD") {
  const TwoStageDesign d = musec::design();
  std::vector<ReplicateRecord> records;
  Scenario sc{0.14, d, 2, 31, Conditioning::all};
  (void)run_scenario(sc, &records);
  const auto se = bootstrap_se(d, 0.14, 2, 31);
  const double a = records[0].estimates.mle_overall;
  const double b = records[1].estimates.mle_overall;
  const double sd = std::sqrt((a - b) * (a - b) / 2.0);
  const int overall_idx = static_cast<int>(Estimator::mle_overall);
  CHECK(*se[overall_idx] == doctest::Approx(sd).epsilon(1e-12));
}

TEST_CASE("bias_sweep panels") {
  std::vector<NormalEndpointSpec> specs = {{40, 1.0, 0.5, 0.5},
                                           {100, 1.0, 0.5, 0.5},
                                           {620, 1.0, 0.5, 0.5}};
  std::vector<double> grid;
  for (int i = 0; i <= 30; ++i) {
    grid.push_back(-0.5 + 0.05 * i);  // includes theta = 0
  }
  const auto table = bias_sweep(specs, 0.05, grid);
  REQUIRE(table.size() == specs.size() * grid.size());

  for (const auto& row : table) {
    // mixing identity per row
    const double p = row.prob_stop;
    CHECK(std::fabs(p * row.bias_stop_stage1 +
                    (1.0 - p) * row.bias_continue_stage2 -
                    row.bias_unconditional) < 1e-10);
    CHECK_FALSE(row.mc_prob_stop.has_value());
    // the early-stop probability at theta=0 is the interim p threshold,
    // identical across sample sizes
    if (row.theta == 0.0) {
      CHECK(row.prob_stop == doctest::Approx(0.0088).epsilon(0.01));
    }
  }
  // small trials carry the largest early-stop bias at theta = 0
  const auto at_theta0 = [&](double n) {
    for (const auto& row : table) {
      if (row.n == n && row.theta == 0.0) return row.bias_stop_stage1;
    }
    return -1.0;
  };
  CHECK(at_theta0(40) == doctest::Approx(1.2107793).epsilon(1e-6));
  CHECK(at_theta0(40) > at_theta0(100));
  CHECK(at_theta0(100) > at_theta0(620));
}

TEST_CASE("bias_sweep Monte Carlo cross-check") {
  std::vector<NormalEndpointSpec> specs = {{100, 1.0, 0.5, 0.5}};
  std::vector<double> grid = {0.2, 0.5};
  SweepOptions opts;
  opts.mc_replicates = 200000;
  opts.seed = 2;
  const auto table = bias_sweep(specs, 0.05, grid, opts);
  for (const auto& row : table) {
    REQUIRE(row.mc_prob_stop.has_value());
    const double se_p = std::sqrt(row.prob_stop * (1.0 - row.prob_stop) /
                                  static_cast<double>(opts.mc_replicates));
    CHECK(std::fabs(*row.mc_prob_stop - row.prob_stop) < 4.0 * se_p);
    // the MLE's sampling SD on the N=100 design is below 0.3
    CHECK(std::fabs(*row.mc_bias_unconditional - row.bias_unconditional) <
          4.0 * 0.3 / std::sqrt(static_cast<double>(opts.mc_replicates)));
  }
}

TEST_CASE("bias_sweep input validation") {
  std::vector<NormalEndpointSpec> specs = {{100, 1.0, 0.5, 0.5}};
  CHECK_THROWS_AS((void)bias_sweep(specs, 0.05, {}), std::invalid_argument);
  CHECK_THROWS_AS((void)bias_sweep(specs, 0.05, {0.2, 0.1}),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)bias_sweep({}, 0.05, {0.1}), std::invalid_argument);
}

TEST_CASE("export_histogram") {
  const TwoStageDesign d = musec::design();
  std::vector<ReplicateRecord> records;
  Scenario sc{0.14, d, 4000, 37, Conditioning::all};
  (void)run_scenario(sc, &records);
  REQUIRE(records.size() == 4000);

  std::uint64_t n_stage2 = 0;
  for (const auto& r : records) {
    n_stage2 += r.stopped_stage == 2;
  }

  const auto edges = default_histogram_edges();
  REQUIRE(edges.size() == 201);
  const auto hist = export_histogram(records, edges);
  for (int e = 0; e < kNumEstimators; ++e) {
    std::uint64_t total = 0;
    for (const auto c : hist.counts[e]) {
      total += c;
    }
    const bool conditional =
        e == static_cast<int>(Estimator::mle_stage2_increment) ||
        e == static_cast<int>(Estimator::umvcue) ||
        e == static_cast<int>(Estimator::cbc_mle);
    // counts sum to the contributing replicates
    CHECK(total == (conditional ? n_stage2 : sc.replicates));
  }

  CHECK_THROWS_AS((void)export_histogram(records, {1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)export_histogram(records, {1.0, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)export_histogram(records, {2.0, 1.0}),
                  std::invalid_argument);
}

TEST_CASE("histogram bin placement and overflow") {
  const TwoStageDesign d = musec::design();
  ReplicateRng rng(1, 0);
  const auto params = canonical_params(0.14, d);
  auto rec = simulate_replicate(rng, params, d);

  auto with_value = [&](double v) {
    ReplicateRecord r = rec;
    r.estimates.mle_overall = v;
    return r;
  };
  const std::vector<double> edges = {0.0, 0.5, 1.0};
  const int idx = static_cast<int>(Estimator::mle_overall);
  {
    const auto h = export_histogram({with_value(-0.2)}, edges);
    CHECK(h.counts[idx][0] == 1);  // underflow
  }
  {
    const auto h = export_histogram({with_value(0.0)}, edges);
    CHECK(h.counts[idx][1] == 1);  // lower edge is inclusive
  }
  {
    const auto h = export_histogram({with_value(0.7)}, edges);
    CHECK(h.counts[idx][2] == 1);
  }
  {
    const auto h = export_histogram({with_value(1.0)}, edges);
    CHECK(h.counts[idx][3] == 1);  // upper edge spills into overflow
  }
}

TEST_CASE("records are returned in replicate order") {
  const TwoStageDesign d = musec::design();
  std::vector<ReplicateRecord> records;
  Scenario sc{0.14, d, 10000, 41, Conditioning::all};
  (void)run_scenario(sc, &records, 3);
  REQUIRE(records.size() == 10000);
  for (std::uint64_t r = 0; r < records.size(); ++r) {
    CHECK(records[r].index == r);
  }
}

TEST_CASE("conditioning names round-trip") {
  for (auto c : {Conditioning::all, Conditioning::stage2_only,
                 Conditioning::stage1_only}) {
    CHECK(conditioning_from_name(conditioning_name(c)) == c);
  }
  CHECK_THROWS_AS((void)conditioning_from_name("sometimes"),
                  std::invalid_argument);
}
