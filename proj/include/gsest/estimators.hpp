#pragma once

#include <optional>

#include "gsest/design.hpp"

namespace gsest {

// Realised trial outcome on the canonical scale: stopping stage, the
// maximum likelihood estimates from all data / stage 1 data / stage 2
// increment data, and the standardised statistics.
struct ObservedOutcome {
  int stopped_stage;  // 1 or 2
  double theta_hat_overall;
  double theta_hat_stage1;
  // Difference computed from post-interim patients only; present iff
  // the trial reached stage 2.
  std::optional<double> theta_hat_stage2_increment;
  double z1;
  std::optional<double> z2;
  TwoStageDesign design;

  // Stage-1 stop: z2 empty and z1 >= design.e1.
  // Stage-2: z2 present and z1 < design.e1; stage-wise estimates follow
  // from the information-weighted decomposition.
  static ObservedOutcome from_z(const TwoStageDesign& design, double z1,
                                std::optional<double> z2);

  // Reduces binary trial data to the canonical scale against the given
  // z-scale boundaries; information is always the observed information
  // recomputed from the counts at each analysis.
  static ObservedOutcome from_binary_data(const BinaryTrialData& data,
                                          double e1, double e2);
  static ObservedOutcome from_binary_data(const BinaryTrialData& data,
                                          const TwoStageDesign& boundaries);
};

// The eight point estimates. Entries that are conditional on reaching
// stage 2 (stage-2 MLE, UMVCUE, CBC-MLE) are absent for a stage-1 stop,
// where all unconditional estimators equal the stage 1 MLE.
struct EstimateSet {
  double mle_overall;
  double mle_stage1;
  std::optional<double> mle_stage2_increment;
  double mue;
  double umvue;
  double ubc_mle;
  std::optional<double> umvcue;
  std::optional<double> cbc_mle;

  // Relative differences to mle_overall in percent (not rounded).
  std::optional<double> rel_diff_pct_mle_overall;
  std::optional<double> rel_diff_pct_mle_stage1;
  std::optional<double> rel_diff_pct_mle_stage2_increment;
  std::optional<double> rel_diff_pct_mue;
  std::optional<double> rel_diff_pct_umvue;
  std::optional<double> rel_diff_pct_ubc_mle;
  std::optional<double> rel_diff_pct_umvcue;
  std::optional<double> rel_diff_pct_cbc_mle;
};

// Difference in proportions among post-interim patients only. Requires at
// least one new patient on each arm.
double mle_stage2_increment(const BinaryTrialData& data);

// Expected over-estimation of the overall MLE averaged over both stopping
// stages: (i2-i1)/(i2*sqrt(i1)) * phi(e1 - theta*sqrt(i1)).
double unconditional_bias(double theta, const TwoStageDesign& design);

// Expected under-estimation of the overall MLE among trials that continue
// to the final analysis: -sqrt(i1)*phi(u)/(i2*Phi(u)), u = e1 -
// theta*sqrt(i1). Always <= 0.
double conditional_bias_stage2(double theta, const TwoStageDesign& design);

// Expected over-estimation of the stage 1 MLE among trials that stop at
// the interim: phi(u)/((1-Phi(u))*sqrt(i1)). Always >= 0.
double conditional_bias_stage1_stop(double theta, const TwoStageDesign& design);

// Bias-corrected MLEs, solved as fixed points of
// theta = theta_hat_obs - bias(theta).
double ubc_mle(double theta_hat_obs, const TwoStageDesign& design);
double cbc_mle(double theta_hat_obs, const TwoStageDesign& design);

// Rao-Blackwell estimators for stage-2 outcomes.
double umvue(const ObservedOutcome& outcome);
double umvcue(const ObservedOutcome& outcome);

// Stagewise-ordering p-value function, strictly increasing in theta.
// Stage-2 outcome: P(Z1 >= e1) + P(Z1 < e1, Z2 >= z2_obs) under theta.
// Stage-1 outcome: P(Z1 >= z1_obs) under theta.
double stagewise_pvalue(double theta, const ObservedOutcome& outcome);

// Median unbiased estimator: the root of stagewise_pvalue(theta) = 1/2.
double mue(const ObservedOutcome& outcome);

// All estimators for one outcome, with relative differences to the
// overall MLE. For a stage-1 stop the unconditional estimators all equal
// the stage 1 MLE and the conditional entries are absent.
EstimateSet estimate_outcome(const ObservedOutcome& outcome);

// Convenience composition: reduce binary data to an outcome against the
// given boundaries, then estimate. Only the boundaries of `design` are
// used; information is recomputed from the data.
EstimateSet estimate_all(const BinaryTrialData& data, double e1, double e2);
EstimateSet estimate_all(const BinaryTrialData& data,
                         const TwoStageDesign& design);

}  // namespace gsest
