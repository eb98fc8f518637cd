#include "gsest/estimators.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "gsest/errors.hpp"
#include "gsest/numerics.hpp"

namespace gsest {

using numerics::bivariate_normal_cdf;
using numerics::find_root;
using numerics::Interval;
using numerics::inverse_mills_ratio;
using numerics::SolverSettings;
using numerics::std_normal_cdf;
using numerics::std_normal_pdf;

namespace {

constexpr double kFixedPointTol = 1e-12;
constexpr double kMueThetaTol = 1e-12;

// phi(x)/Phi(x), stable in the left tail.
double pdf_over_cdf(double x) { return inverse_mills_ratio(-x); }

void require_stage2(const ObservedOutcome& outcome, const char* who) {
  if (outcome.stopped_stage != 2) {
    throw std::invalid_argument(std::string(who) +
                                ": outcome must have reached stage 2");
  }
}

}  // namespace

ObservedOutcome ObservedOutcome::from_z(const TwoStageDesign& design,
                                        double z1, std::optional<double> z2) {
  const bool stopped = evaluate_stopping(design, z1) ==
                       StopDecision::stop_efficacy_stage1;
  if (stopped && z2.has_value()) {
    throw std::invalid_argument(
        "ObservedOutcome: z1 meets the interim boundary, z2 must be absent");
  }
  if (!stopped && !z2.has_value()) {
    throw std::invalid_argument(
        "ObservedOutcome: trial continues past the interim, z2 is required");
  }
  ObservedOutcome out{stopped ? 1 : 2,
                      0.0,
                      z1 / design.sqrt_i1(),
                      std::nullopt,
                      z1,
                      z2,
                      design};
  if (stopped) {
    out.theta_hat_overall = out.theta_hat_stage1;
  } else {
    out.theta_hat_overall = *z2 / design.sqrt_i2();
    out.theta_hat_stage2_increment =
        (design.i2 * out.theta_hat_overall - design.i1 * out.theta_hat_stage1) /
        (design.i2 - design.i1);
  }
  return out;
}

ObservedOutcome ObservedOutcome::from_binary_data(const BinaryTrialData& data,
                                                  double e1, double e2) {
  const double i1 = binary_information(data.interim);
  const double theta1 = proportion_difference(data.interim);
  const double z1 = theta1 * std::sqrt(i1);
  const bool stopped = z1 >= e1;

  if (stopped) {
    // Only interim information enters the stage-1 estimators; the design
    // still carries an i2. Use the observed final information when final
    // counts exist, otherwise a placeholder consistent with the boundary
    // ratio (irrelevant to every stage-1 formula).
    double i2;
    if (data.final_.has_value()) {
      i2 = binary_information(*data.final_);
    } else {
      const double ratio = (e1 / e2) * (e1 / e2);
      i2 = i1 * (ratio > 1.0 ? ratio : 2.0);
    }
    const TwoStageDesign design(e1, e2, i1, i2);
    return from_z(design, z1, std::nullopt);
  }

  if (!data.final_.has_value()) {
    throw std::invalid_argument(
        "trial data: z1 is below the interim boundary so the trial "
        "continues, but no final-analysis counts were provided");
  }
  const double i2 = binary_information(*data.final_);
  if (!(i2 > i1)) {
    throw std::invalid_argument(
        "trial data: observed final information does not exceed interim "
        "information");
  }
  const TwoStageDesign design(e1, e2, i1, i2);
  const double theta_obs = proportion_difference(*data.final_);
  const double z2 = theta_obs * std::sqrt(i2);
  ObservedOutcome out = from_z(design, z1, z2);
  // Replace the information-decomposition increment with the exact count
  // difference; the two agree to rounding.
  out.theta_hat_stage2_increment = mle_stage2_increment(data);
  return out;
}

ObservedOutcome ObservedOutcome::from_binary_data(
    const BinaryTrialData& data, const TwoStageDesign& boundaries) {
  return from_binary_data(data, boundaries.e1, boundaries.e2);
}

double mle_stage2_increment(const BinaryTrialData& data) {
  if (!data.final_.has_value()) {
    throw std::invalid_argument(
        "mle_stage2_increment: no final-analysis counts");
  }
  const auto& fin = *data.final_;
  const long long nc = fin.control.n - data.interim.control.n;
  const long long nt = fin.treatment.n - data.interim.treatment.n;
  if (nc < 1 || nt < 1) {
    throw std::invalid_argument(
        "mle_stage2_increment: no post-interim patients on at least one arm");
  }
  const double sc =
      static_cast<double>(fin.control.successes - data.interim.control.successes);
  const double st = static_cast<double>(fin.treatment.successes -
                                        data.interim.treatment.successes);
  return st / static_cast<double>(nt) - sc / static_cast<double>(nc);
}

double unconditional_bias(double theta, const TwoStageDesign& design) {
  return (design.i2 - design.i1) / (design.i2 * design.sqrt_i1()) *
         std_normal_pdf(design.e1 - theta * design.sqrt_i1());
}

double conditional_bias_stage2(double theta, const TwoStageDesign& design) {
  const double u = design.e1 - theta * design.sqrt_i1();
  return -design.sqrt_i1() / design.i2 * pdf_over_cdf(u);
}

double conditional_bias_stage1_stop(double theta,
                                    const TwoStageDesign& design) {
  const double sqrt_i1 = design.sqrt_i1();
  return numerics::truncated_normal_mean(theta, 1.0 / sqrt_i1,
                                         numerics::TruncationSide::above_cut,
                                         design.e1 / sqrt_i1) -
         theta;
}

namespace {

double corrected_mle(double theta_hat_obs, const TwoStageDesign& design,
                     double (*bias)(double, const TwoStageDesign&)) {
  const auto g = [&](double theta) {
    return theta_hat_obs - bias(theta, design);
  };
  SolverSettings settings;
  settings.abs_tol = kFixedPointTol;
  const double half_width = 10.0 / design.sqrt_i1();
  const Interval fallback(theta_hat_obs - half_width,
                          theta_hat_obs + half_width);
  return numerics::solve_fixed_point(g, theta_hat_obs, settings, &fallback);
}

}  // namespace

double ubc_mle(double theta_hat_obs, const TwoStageDesign& design) {
  return corrected_mle(theta_hat_obs, design, &unconditional_bias);
}

double cbc_mle(double theta_hat_obs, const TwoStageDesign& design) {
  return corrected_mle(theta_hat_obs, design, &conditional_bias_stage2);
}

double umvue(const ObservedOutcome& outcome) {
  require_stage2(outcome, "umvue");
  const TwoStageDesign& d = outcome.design;
  // Conditional law of the stage 1 MLE given the overall MLE is normal
  // with mean theta_hat_overall and variance (i2-i1)/(i1*i2), truncated
  // below the interim boundary on the difference scale.
  const double tau = std::sqrt((d.i2 - d.i1) / (d.i1 * d.i2));
  const double t =
      (d.e1 / d.sqrt_i1() - outcome.theta_hat_overall) / tau;
  return outcome.theta_hat_overall - tau * pdf_over_cdf(t);
}

double umvcue(const ObservedOutcome& outcome) {
  require_stage2(outcome, "umvcue");
  const TwoStageDesign& d = outcome.design;
  const double tau = std::sqrt((d.i2 - d.i1) / (d.i1 * d.i2));
  const double t =
      (d.e1 / d.sqrt_i1() - outcome.theta_hat_overall) / tau;
  const double w1 = d.sqrt_i1() / (std::sqrt(d.i2 - d.i1) * d.sqrt_i2());
  return outcome.theta_hat_overall + w1 * pdf_over_cdf(t);
}

double stagewise_pvalue(double theta, const ObservedOutcome& outcome) {
  const TwoStageDesign& d = outcome.design;
  if (outcome.stopped_stage == 1) {
    return 1.0 - std_normal_cdf(outcome.z1 - theta * d.sqrt_i1());
  }
  // P(Z1 >= e1) + P(Z1 < e1, Z2 >= z2) = 1 - BVN(e1 - mu1, z2 - mu2; rho).
  const double h = d.e1 - theta * d.sqrt_i1();
  const double k = *outcome.z2 - theta * d.sqrt_i2();
  return 1.0 - bivariate_normal_cdf(h, k, d.rho());
}

double mue(const ObservedOutcome& outcome) {
  const auto f = [&outcome](double theta) {
    return stagewise_pvalue(theta, outcome) - 0.5;
  };
  // P is strictly increasing in theta, so doubling the bracket around the
  // observed MLE always finds the sign change.
  const double center = outcome.theta_hat_overall;
  double width = 4.0 / outcome.design.sqrt_i1();
  for (int round = 0; round < 60; ++round) {
    const Interval bracket(center - width, center + width);
    const double flo = f(bracket.lo);
    const double fhi = f(bracket.hi);
    if ((flo <= 0.0 && fhi >= 0.0) || (flo >= 0.0 && fhi <= 0.0)) {
      SolverSettings settings;
      settings.abs_tol = kMueThetaTol;
      return find_root(f, bracket, settings);
    }
    width *= 2.0;
  }
  throw SolverError("mue: could not bracket the median");
}

namespace {

std::optional<double> rel_diff_pct(double value, double reference) {
  if (reference == 0.0) {
    return std::nullopt;
  }
  return 100.0 * (value - reference) / reference;
}

}  // namespace

EstimateSet estimate_outcome(const ObservedOutcome& outcome) {
  EstimateSet set{};
  set.mle_overall = outcome.theta_hat_overall;
  set.mle_stage1 = outcome.theta_hat_stage1;

  if (outcome.stopped_stage == 1) {
    // The stage 1 MLE is unconditionally unbiased and the single-look law
    // is symmetric, so every unconditional estimator collapses to it.
    set.mue = outcome.theta_hat_stage1;
    set.umvue = outcome.theta_hat_stage1;
    set.ubc_mle = outcome.theta_hat_stage1;
  } else {
    set.mle_stage2_increment = outcome.theta_hat_stage2_increment;
    set.mue = mue(outcome);
    set.umvue = umvue(outcome);
    set.ubc_mle = ubc_mle(outcome.theta_hat_overall, outcome.design);
    set.umvcue = umvcue(outcome);
    set.cbc_mle = cbc_mle(outcome.theta_hat_overall, outcome.design);
  }

  const double ref = set.mle_overall;
  set.rel_diff_pct_mle_overall = rel_diff_pct(set.mle_overall, ref);
  set.rel_diff_pct_mle_stage1 = rel_diff_pct(set.mle_stage1, ref);
  set.rel_diff_pct_mue = rel_diff_pct(set.mue, ref);
  set.rel_diff_pct_umvue = rel_diff_pct(set.umvue, ref);
  set.rel_diff_pct_ubc_mle = rel_diff_pct(set.ubc_mle, ref);
  if (set.mle_stage2_increment.has_value()) {
    set.rel_diff_pct_mle_stage2_increment =
        rel_diff_pct(*set.mle_stage2_increment, ref);
  }
  if (set.umvcue.has_value()) {
    set.rel_diff_pct_umvcue = rel_diff_pct(*set.umvcue, ref);
  }
  if (set.cbc_mle.has_value()) {
    set.rel_diff_pct_cbc_mle = rel_diff_pct(*set.cbc_mle, ref);
  }
  return set;
}

EstimateSet estimate_all(const BinaryTrialData& data, double e1, double e2) {
  return estimate_outcome(ObservedOutcome::from_binary_data(data, e1, e2));
}

EstimateSet estimate_all(const BinaryTrialData& data,
                         const TwoStageDesign& design) {
  return estimate_all(data, design.e1, design.e2);
}

}  // namespace gsest
