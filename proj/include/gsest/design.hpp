#pragma once

#include <optional>

namespace gsest {

// Two-stage efficacy design: z-scale boundaries e1 (interim) and e2
// (final) with statistical information i1 < i2 at the two analyses.
// Information is in inverse-variance units of the treatment-difference
// estimate.
struct TwoStageDesign {
  double e1;
  double e2;
  double i1;
  double i2;

  TwoStageDesign(double e1_, double e2_, double i1_, double i2_);

  double sqrt_i1() const;
  double sqrt_i2() const;
  // Correlation of the stage-wise z statistics, sqrt(i1/i2).
  double rho() const;
};

// Cumulative per-arm success counts at one analysis.
struct ArmCounts {
  long long successes;
  long long n;
};

struct AnalysisCounts {
  ArmCounts control;
  ArmCounts treatment;
};

// Cumulative counts at the interim and (when the trial got there) the
// final analysis.
struct BinaryTrialData {
  AnalysisCounts interim;
  std::optional<AnalysisCounts> final_;

  BinaryTrialData(AnalysisCounts interim_, std::optional<AnalysisCounts> final_counts);
};

// Mean vector and correlation of the canonical joint distribution of the
// stage-wise z statistics: (theta*sqrt(i1), theta*sqrt(i2)), corr
// sqrt(i1/i2).
struct CanonicalParams {
  double mu1;
  double mu2;
  double rho;
};

// Normal-endpoint design input: total sample size, outcome standard
// deviation, per-arm allocation fraction and interim information
// fraction.
struct NormalEndpointSpec {
  long long total_n;
  double sd = 1.0;
  double allocation = 0.5;
  double interim_fraction = 0.5;

  void validate() const;
};

struct InformationPair {
  double i1;
  double i2;
};

enum class StopDecision { stop_efficacy_stage1, continue_to_stage2 };

// Constant C for a two-stage one-sided efficacy boundary of the form
// e2 = C, e1 = C/rho, chosen so that the overall type I error equals
// alpha under the standard bivariate normal with correlation rho.
double obf_constant(double alpha, double rho);

// Design with boundaries derived from obf_constant at the planned
// information pair.
TwoStageDesign obf_design(double alpha, double i1, double i2);

// Observed information at one analysis from the pooled success
// proportion: 1 / (p*(1-p)*(1/n_control + 1/n_treatment)).
double binary_information(const AnalysisCounts& counts);

struct ZStatistics {
  double z1;
  std::optional<double> z2;
  double i1;
  std::optional<double> i2;
};

// Standardised test statistics z_k = (difference in proportions at
// analysis k) * sqrt(i_k), with the observed information recomputed from
// the data at each analysis.
ZStatistics z_statistics(const BinaryTrialData& data);

// Information at interim and final analysis for a normal endpoint with
// known standard deviation.
InformationPair normal_information(const NormalEndpointSpec& spec);

// Efficacy stopping rule at the interim: stop iff z1 >= e1.
StopDecision evaluate_stopping(const TwoStageDesign& design, double z1);

CanonicalParams canonical_params(double theta, const TwoStageDesign& design);

// Difference in proportions (treatment minus control) at one analysis.
double proportion_difference(const AnalysisCounts& counts);

}  // namespace gsest
