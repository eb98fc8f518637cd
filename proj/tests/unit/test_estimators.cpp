#include <cmath>
#include <stdexcept>
#include <random>

#include "doctest.h"
#include "gsest/case_study.hpp"
#include "gsest/estimators.hpp"
#include "gsest/numerics.hpp"
#include "support/oracles.hpp"

using namespace gsest;
namespace num = gsest::numerics;

namespace {

ObservedOutcome musec_outcome() {
  return ObservedOutcome::from_binary_data(musec::trial_data(),
                                           musec::kBoundaryInterim,
                                           musec::kBoundaryFinal);
}

}  // namespace

TEST_CASE("stage-wise MLEs from the bundled counts") {
  const auto outcome = musec_outcome();
  CHECK(outcome.stopped_stage == 2);
  CHECK(outcome.theta_hat_overall == doctest::Approx(0.1370).epsilon(4e-3));
  CHECK(outcome.theta_hat_stage1 == doctest::Approx(0.1436).epsilon(4e-3));
  CHECK(*outcome.theta_hat_stage2_increment ==
        doctest::Approx(0.1139).epsilon(4e-3));
  // For count data the exact post-interim difference matches the
  // information-weighted decomposition only to O(1/n).
  const auto& d = outcome.design;
  const double decomposed =
      (d.i2 * outcome.theta_hat_overall - d.i1 * outcome.theta_hat_stage1) /
      (d.i2 - d.i1);
  CHECK(*outcome.theta_hat_stage2_increment ==
        doctest::Approx(decomposed).epsilon(0.05));
}

TEST_CASE("canonical-scale outcomes satisfy the decomposition exactly") {
  const TwoStageDesign d = musec::design();
  for (double z2 : {0.5, 1.977, 2.718, 4.0}) {
    const auto outcome = ObservedOutcome::from_z(d, 2.54, z2);
    CHECK(std::fabs(outcome.theta_hat_overall * d.i2 -
                    (outcome.theta_hat_stage1 * d.i1 +
                     *outcome.theta_hat_stage2_increment * (d.i2 - d.i1))) <
          1e-6);
  }
}

TEST_CASE("mle_stage2_increment") {
  CHECK(mle_stage2_increment(musec::trial_data()) ==
        doctest::Approx(15.0 / 42.0 - 9.0 / 37.0).epsilon(1e-15));
  // zero new events on both arms
  const BinaryTrialData quiet(AnalysisCounts{{5, 20}, {6, 20}},
                              AnalysisCounts{{5, 30}, {6, 31}});
  CHECK(mle_stage2_increment(quiet) == 0.0);
  // no post-interim patients on one arm
  const BinaryTrialData stuck(AnalysisCounts{{5, 20}, {6, 20}},
                              AnalysisCounts{{5, 20}, {8, 30}});
  CHECK_THROWS_AS((void)mle_stage2_increment(stuck), std::invalid_argument);
}

TEST_CASE("unconditional bias closed form") {
  const TwoStageDesign d = musec::design();
  CHECK(unconditional_bias(0.1328, d) ==
        doctest::Approx(0.00420).epsilon(0.03));
  // no early stopping possible
  const TwoStageDesign far(40.0, 1.977, d.i1, d.i2);
  CHECK(unconditional_bias(0.1, far) == doctest::Approx(0.0).epsilon(1e-30));
  // single-look limit: i1 -> i2 kills the prefactor
  const TwoStageDesign tight(2.797, 1.977, d.i2 * (1.0 - 1e-12), d.i2);
  CHECK(std::fabs(unconditional_bias(0.1, tight)) < 1e-9);
}

TEST_CASE("conditional bias at the final analysis") {
  const TwoStageDesign d = musec::design();
  CHECK(conditional_bias_stage2(0.1909, d) ==
        doctest::Approx(-0.0539).epsilon(4e-3));
  CHECK(conditional_bias_stage2(0.1909, d) <= 0.0);
  const TwoStageDesign far(40.0, 1.977, d.i1, d.i2);
  CHECK(std::fabs(conditional_bias_stage2(0.1, far)) < 1e-30);
}

TEST_CASE("conditional bias for early stoppers") {
  const TwoStageDesign d = musec::design();
  CHECK(conditional_bias_stage1_stop(0.10, d) ==
        doctest::Approx(0.0875156).epsilon(1e-5));
  CHECK(0.10 + conditional_bias_stage1_stop(0.10, d) ==
        doctest::Approx(0.188).epsilon(5e-3));
  CHECK(0.14 + conditional_bias_stage1_stop(0.14, d) ==
        doctest::Approx(0.197).epsilon(5e-3));
  CHECK(0.18 + conditional_bias_stage1_stop(0.18, d) ==
        doctest::Approx(0.212).epsilon(5e-3));
}

TEST_CASE("mixing identity ties the three bias curves together") {
  // p*A + (1-p)*B = C holds algebraically; check it numerically across
  // the sweep range for the three endpoint sizes.
  for (long long n : {40LL, 100LL, 620LL}) {
    const auto info = normal_information(NormalEndpointSpec{n, 1.0, 0.5, 0.5});
    const TwoStageDesign d = obf_design(0.05, info.i1, info.i2);
    for (double theta = -0.5; theta <= 1.0; theta += 0.0755) {
      const double p = 1.0 - num::std_normal_cdf(d.e1 - theta * d.sqrt_i1());
      const double mix = p * conditional_bias_stage1_stop(theta, d) +
                         (1.0 - p) * conditional_bias_stage2(theta, d);
      CHECK(std::fabs(mix - unconditional_bias(theta, d)) < 1e-10);
    }
  }
}

TEST_CASE("sign structure of the corrections") {
  const TwoStageDesign d = musec::design();
  for (double theta = -0.3; theta <= 0.6; theta += 0.093) {
    CHECK(conditional_bias_stage1_stop(theta, d) >= 0.0);
    CHECK(conditional_bias_stage2(theta, d) <= 0.0);
    CHECK(unconditional_bias(theta, d) >= 0.0);
  }
  for (double obs : {0.05, 0.137, 0.25}) {
    CHECK(ubc_mle(obs, d) <= obs);
    CHECK(cbc_mle(obs, d) > obs);
  }
}

TEST_CASE("bias-corrected MLEs on the bundled data") {
  const TwoStageDesign d = musec::design();
  const auto outcome = musec_outcome();
  const double obs = outcome.theta_hat_overall;

  const double ubc = ubc_mle(obs, d);
  CHECK(ubc == doctest::Approx(0.1328).epsilon(4e-3));
  CHECK(std::fabs(ubc - obs + unconditional_bias(ubc, d)) <= 1e-10);

  const double cbc = cbc_mle(obs, d);
  CHECK(cbc == doctest::Approx(0.1909).epsilon(3e-3));
  CHECK(std::fabs(cbc - obs + conditional_bias_stage2(cbc, d)) <= 1e-10);

  // a boundary far out leaves the MLE untouched
  const TwoStageDesign far(40.0, 1.977, d.i1, d.i2);
  CHECK(ubc_mle(obs, far) == doctest::Approx(obs).epsilon(1e-12));
  CHECK(cbc_mle(obs, far) == doctest::Approx(obs).epsilon(1e-12));

  // self-consistency away from the observed value
  const double at02 = ubc_mle(0.20, d);
  CHECK(std::fabs(at02 - 0.20 + unconditional_bias(at02, d)) <= 1e-10);
}

TEST_CASE("Rao-Blackwell estimators on the bundled data") {
  const auto outcome = musec_outcome();
  CHECK(umvue(outcome) == doctest::Approx(0.1278).epsilon(4e-3));
  CHECK(umvcue(outcome) == doctest::Approx(0.1724).epsilon(3e-3));
  CHECK(umvcue(outcome) >= outcome.theta_hat_overall);

  // no early stopping possible: both collapse to the overall MLE
  const auto& d = outcome.design;
  const TwoStageDesign far(40.0, 1.977, d.i1, d.i2);
  const auto free_outcome = ObservedOutcome::from_z(far, outcome.z1, outcome.z2);
  CHECK(umvue(free_outcome) ==
        doctest::Approx(outcome.theta_hat_overall).epsilon(1e-12));
  CHECK(umvcue(free_outcome) ==
        doctest::Approx(outcome.theta_hat_overall).epsilon(1e-12));
}

TEST_CASE("Rao-Blackwell estimators match conditional-expectation quadrature") {
  // 50 synthetic stage-2 outcomes over a spread of designs.
  std::mt19937 gen(20210614);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int checked = 0;
  while (checked < 50) {
    const double i1 = 50.0 + 450.0 * u01(gen);
    const double ratio = 0.35 + 0.55 * u01(gen);  // i1/i2
    const double i2 = i1 / ratio;
    const double e1 = 1.5 + 1.5 * u01(gen);
    const double z1 = e1 - 3.0 * u01(gen);
    const double z2 = -1.0 + 5.0 * u01(gen);
    const TwoStageDesign d(e1, 0.7 * e1, i1, i2);
    const auto outcome = ObservedOutcome::from_z(d, z1, z2);

    const double m = outcome.theta_hat_overall;
    const double c = d.e1 / d.sqrt_i1();
    const double tau = std::sqrt((d.i2 - d.i1) / (d.i1 * d.i2));
    if ((c - m) / tau < -4.0) {
      continue;  // keep the truncation mass away from the quadrature floor
    }
    const double cond_mean_stage1 = oracles::conditional_mean_below(m, tau, c);
    CHECK(std::fabs(umvue(outcome) - cond_mean_stage1) < 1e-8);
    const double cond_mean_stage2 =
        (d.i2 * m - d.i1 * cond_mean_stage1) / (d.i2 - d.i1);
    CHECK(std::fabs(umvcue(outcome) - cond_mean_stage2) < 1e-8);
    ++checked;
  }
}

TEST_CASE("stagewise p-value function") {
  const auto outcome = musec_outcome();
  // median at the published estimate
  CHECK(stagewise_pvalue(0.1341, outcome) == doctest::Approx(0.500).epsilon(4e-3));
  // monotone limits
  CHECK(stagewise_pvalue(-50.0, outcome) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(stagewise_pvalue(50.0, outcome) == doctest::Approx(1.0).epsilon(1e-12));
  // strictly increasing over a 100-point grid
  double prev = -1.0;
  for (int i = 0; i < 100; ++i) {
    const double theta = -0.3 + 0.8 * i / 99.0;
    const double p = stagewise_pvalue(theta, outcome);
    CHECK(p > prev);
    CHECK(p > 0.0);
    CHECK(p < 1.0);
    prev = p;
  }
}

TEST_CASE("stagewise p-value against the Monte Carlo oracle") {
  const auto outcome = musec_outcome();
  const auto& d = outcome.design;
  for (double theta : {0.0, 0.1341}) {
    double se = 0.0;
    const double mc =
        oracles::pvalue_mc(theta, d.e1, *outcome.z2, d.sqrt_i1(), d.sqrt_i2(),
                           d.rho(), 1000000, 811u, &se);
    CHECK(std::fabs(stagewise_pvalue(theta, outcome) - mc) < 3.0 * se);
  }
}

TEST_CASE("median unbiased estimator") {
  const auto outcome = musec_outcome();
  const double m = mue(outcome);
  CHECK(m == doctest::Approx(0.1341).epsilon(2e-3));
  CHECK(std::fabs(stagewise_pvalue(m, outcome) - 0.5) <= 1e-8);

  // stage-1 stop: the median is the stage 1 MLE itself
  const auto& d = outcome.design;
  const auto stopped = ObservedOutcome::from_z(d, d.e1 + 0.4, std::nullopt);
  CHECK(mue(stopped) ==
        doctest::Approx(stopped.theta_hat_stage1).epsilon(1e-9));

  // bracket stress: z2 exactly on the final boundary
  const auto edge = ObservedOutcome::from_z(d, 2.1, d.e2);
  const double medge = mue(edge);
  CHECK(std::isfinite(medge));
  CHECK(std::fabs(stagewise_pvalue(medge, edge) - 0.5) <= 1e-8);
  // bisection cross-check
  const double lo = medge - 0.05;
  const double hi = medge + 0.05;
  double a = lo;
  double b = hi;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (a + b);
    (stagewise_pvalue(mid, edge) < 0.5 ? a : b) = mid;
  }
  CHECK(medge == doctest::Approx(0.5 * (a + b)).epsilon(1e-9));
}

TEST_CASE("estimate_all reproduces the published case-study estimates") {
  const EstimateSet est = estimate_all(musec::trial_data(), musec::design());
  const auto& ref = musec::reference_estimates();
  CHECK(std::fabs(est.mle_overall - ref[0].value) <= 5e-4);
  CHECK(std::fabs(est.mle_stage1 - ref[1].value) <= 5e-4);
  CHECK(std::fabs(*est.mle_stage2_increment - ref[2].value) <= 5e-4);
  CHECK(std::fabs(est.mue - ref[3].value) <= 5e-4);
  CHECK(std::fabs(est.umvue - ref[4].value) <= 5e-4);
  CHECK(std::fabs(est.ubc_mle - ref[5].value) <= 5e-4);
  CHECK(std::fabs(*est.umvcue - ref[6].value) <= 5e-4);
  CHECK(std::fabs(*est.cbc_mle - ref[7].value) <= 5e-4);

  CHECK(*est.rel_diff_pct_mle_overall == 0.0);
  CHECK(std::lround(*est.rel_diff_pct_mle_stage1) == 5);
  CHECK(std::lround(*est.rel_diff_pct_mle_stage2_increment) == -17);
  CHECK(std::lround(*est.rel_diff_pct_mue) == -2);
  CHECK(std::lround(*est.rel_diff_pct_umvue) == -7);
  CHECK(std::lround(*est.rel_diff_pct_ubc_mle) == -3);
  CHECK(std::lround(*est.rel_diff_pct_umvcue) == 26);
  CHECK(std::lround(*est.rel_diff_pct_cbc_mle) == 39);

  // published ordering of the corrections
  CHECK(est.mue > est.ubc_mle);
  CHECK(est.ubc_mle > est.umvue);
  CHECK(*est.cbc_mle > *est.umvcue);
}

TEST_CASE("estimate_all dispatch for a stage-1 stop") {
  // lower the interim boundary below the observed z1
  const EstimateSet est = estimate_all(musec::trial_data(), 2.5, 1.767);
  CHECK(est.mle_overall == est.mle_stage1);
  CHECK(est.mue == est.mle_stage1);
  CHECK(est.umvue == est.mle_stage1);
  CHECK(est.ubc_mle == est.mle_stage1);
  CHECK_FALSE(est.mle_stage2_increment.has_value());
  CHECK_FALSE(est.umvcue.has_value());
  CHECK_FALSE(est.cbc_mle.has_value());
  CHECK(est.mle_stage1 == doctest::Approx(0.1436).epsilon(4e-3));
}

TEST_CASE("stage-1 stop without final counts") {
  const BinaryTrialData interim_only(AnalysisCounts{{12, 97}, {27, 101}},
                                     std::nullopt);
  const EstimateSet est = estimate_all(interim_only, 2.5, 1.767);
  CHECK(est.mle_overall == doctest::Approx(0.1436).epsilon(4e-3));
  // a continuing trial without final data is a validation error
  CHECK_THROWS_AS((void)estimate_all(interim_only, 2.797, 1.977),
                  std::invalid_argument);
}

TEST_CASE("umvue and umvcue require a stage-2 outcome") {
  const TwoStageDesign d = musec::design();
  const auto stopped = ObservedOutcome::from_z(d, d.e1 + 0.1, std::nullopt);
  CHECK_THROWS_AS((void)umvue(stopped), std::invalid_argument);
  CHECK_THROWS_AS((void)umvcue(stopped), std::invalid_argument);
}

TEST_CASE("outcome construction validates the stage/z2 pairing") {
  const TwoStageDesign d = musec::design();
  CHECK_THROWS_AS(ObservedOutcome::from_z(d, d.e1 + 0.1, 2.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(ObservedOutcome::from_z(d, d.e1 - 0.1, std::nullopt),
                  std::invalid_argument);
}

TEST_CASE("location-shift equivariance on the canonical scale") {
  const TwoStageDesign d = musec::design();
  const auto base = musec_outcome();
  const double delta = 0.07;
  const TwoStageDesign shifted_design(d.e1 + delta * d.sqrt_i1(),
                                      d.e2 + delta * d.sqrt_i2(), d.i1, d.i2);
  const auto shifted = ObservedOutcome::from_z(
      shifted_design, base.z1 + delta * d.sqrt_i1(),
      *base.z2 + delta * d.sqrt_i2());

  const EstimateSet a = estimate_outcome(base);
  const EstimateSet b = estimate_outcome(shifted);
  CHECK(std::fabs(b.mle_overall - a.mle_overall - delta) < 1e-9);
  CHECK(std::fabs(b.mle_stage1 - a.mle_stage1 - delta) < 1e-9);
  CHECK(std::fabs(b.mue - a.mue - delta) < 1e-9);
  CHECK(std::fabs(b.umvue - a.umvue - delta) < 1e-9);
  CHECK(std::fabs(b.ubc_mle - a.ubc_mle - delta) < 1e-9);
  CHECK(std::fabs(*b.umvcue - *a.umvcue - delta) < 1e-9);
  CHECK(std::fabs(*b.cbc_mle - *a.cbc_mle - delta) < 1e-9);
}
