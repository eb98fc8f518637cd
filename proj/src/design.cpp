#include "gsest/design.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "gsest/errors.hpp"
#include "gsest/numerics.hpp"

namespace gsest {

using numerics::bivariate_normal_cdf;
using numerics::find_root;
using numerics::Interval;
using numerics::SolverSettings;

TwoStageDesign::TwoStageDesign(double e1_, double e2_, double i1_, double i2_)
    : e1(e1_), e2(e2_), i1(i1_), i2(i2_) {
  if (!(std::isfinite(e1) && std::isfinite(e2))) {
    throw std::invalid_argument("TwoStageDesign: boundaries must be finite");
  }
  if (!(i1 > 0.0 && i2 > i1)) {
    throw std::invalid_argument("TwoStageDesign: requires i2 > i1 > 0");
  }
}

double TwoStageDesign::sqrt_i1() const { return std::sqrt(i1); }
double TwoStageDesign::sqrt_i2() const { return std::sqrt(i2); }
double TwoStageDesign::rho() const { return std::sqrt(i1 / i2); }

namespace {

void validate_arm(const ArmCounts& arm, const char* label) {
  if (arm.n < 1) {
    throw std::invalid_argument(std::string("trial data: arm '") + label +
                                "': n must be >= 1");
  }
  if (arm.successes < 0 || arm.successes > arm.n) {
    throw std::invalid_argument(std::string("trial data: arm '") + label +
                                "': successes must lie in [0, n]");
  }
}

void validate_growth(const ArmCounts& interim, const ArmCounts& final_counts,
                     const char* label) {
  if (final_counts.n < interim.n) {
    throw std::invalid_argument(std::string("trial data: arm '") + label +
                                "': final n is below interim n (counts are "
                                "cumulative)");
  }
  if (final_counts.successes < interim.successes) {
    throw std::invalid_argument(std::string("trial data: arm '") + label +
                                "': final successes are below interim "
                                "successes (counts are cumulative)");
  }
  if (final_counts.successes - interim.successes >
      final_counts.n - interim.n) {
    throw std::invalid_argument(std::string("trial data: arm '") + label +
                                "': stage 2 successes exceed stage 2 "
                                "patients");
  }
}

}  // namespace

BinaryTrialData::BinaryTrialData(AnalysisCounts interim_,
                                 std::optional<AnalysisCounts> final_counts)
    : interim(interim_), final_(final_counts) {
  validate_arm(interim.control, "control");
  validate_arm(interim.treatment, "treatment");
  if (final_.has_value()) {
    validate_arm(final_->control, "control");
    validate_arm(final_->treatment, "treatment");
    validate_growth(interim.control, final_->control, "control");
    validate_growth(interim.treatment, final_->treatment, "treatment");
  }
}

void NormalEndpointSpec::validate() const {
  if (total_n < 4) {
    throw std::invalid_argument("NormalEndpointSpec: total_n must be >= 4");
  }
  if (!(sd > 0.0)) {
    throw std::invalid_argument("NormalEndpointSpec: sd must be > 0");
  }
  if (!(allocation > 0.0 && allocation < 1.0)) {
    throw std::invalid_argument(
        "NormalEndpointSpec: allocation must lie in (0, 1)");
  }
  if (!(interim_fraction > 0.0 && interim_fraction < 1.0)) {
    throw std::invalid_argument(
        "NormalEndpointSpec: interim_fraction must lie in (0, 1)");
  }
}

double obf_constant(double alpha, double rho) {
  if (!(alpha > 0.0 && alpha < 0.5)) {
    throw std::domain_error("obf_constant: alpha must lie in (0, 0.5)");
  }
  if (!(rho > 0.0 && rho < 1.0)) {
    throw std::domain_error("obf_constant: rho must lie in (0, 1)");
  }
  // Overall rejection probability under the null is
  //   P(Z1 >= C/rho) + P(Z1 < C/rho, Z2 >= C) = 1 - BVN(C/rho, C; rho),
  // so C solves BVN(C/rho, C; rho) = 1 - alpha.
  const auto f = [alpha, rho](double c) {
    return bivariate_normal_cdf(c / rho, c, rho) - (1.0 - alpha);
  };
  SolverSettings settings;
  settings.abs_tol = 1e-12;
  const double c = find_root(f, Interval(0.0, 12.0), settings);
  const double attained = 1.0 - bivariate_normal_cdf(c / rho, c, rho);
  if (std::fabs(attained - alpha) > 1e-8) {
    throw SolverError("obf_constant: attained type I error misses alpha");
  }
  return c;
}

TwoStageDesign obf_design(double alpha, double i1, double i2) {
  if (!(i1 > 0.0 && i2 > i1)) {
    throw std::invalid_argument("obf_design: requires i2 > i1 > 0");
  }
  const double rho = std::sqrt(i1 / i2);
  const double c = obf_constant(alpha, rho);
  return TwoStageDesign(c / rho, c, i1, i2);
}

double binary_information(const AnalysisCounts& counts) {
  validate_arm(counts.control, "control");
  validate_arm(counts.treatment, "treatment");
  const long long pooled_successes =
      counts.control.successes + counts.treatment.successes;
  const long long pooled_n = counts.control.n + counts.treatment.n;
  if (pooled_successes <= 0 || pooled_successes >= pooled_n) {
    throw std::invalid_argument(
        "binary_information: degenerate data, pooled success proportion is "
        "0 or 1");
  }
  const double p = static_cast<double>(pooled_successes) /
                   static_cast<double>(pooled_n);
  const double variance =
      p * (1.0 - p) *
      (1.0 / static_cast<double>(counts.control.n) +
       1.0 / static_cast<double>(counts.treatment.n));
  return 1.0 / variance;
}

double proportion_difference(const AnalysisCounts& counts) {
  return static_cast<double>(counts.treatment.successes) /
             static_cast<double>(counts.treatment.n) -
         static_cast<double>(counts.control.successes) /
             static_cast<double>(counts.control.n);
}

ZStatistics z_statistics(const BinaryTrialData& data) {
  ZStatistics out{};
  out.i1 = binary_information(data.interim);
  out.z1 = proportion_difference(data.interim) * std::sqrt(out.i1);
  if (data.final_.has_value()) {
    out.i2 = binary_information(*data.final_);
    out.z2 = proportion_difference(*data.final_) * std::sqrt(*out.i2);
  }
  return out;
}

InformationPair normal_information(const NormalEndpointSpec& spec) {
  spec.validate();
  const double n1 = spec.allocation * static_cast<double>(spec.total_n);
  const double n2 = (1.0 - spec.allocation) * static_cast<double>(spec.total_n);
  const double i2 = 1.0 / (spec.sd * spec.sd * (1.0 / n1 + 1.0 / n2));
  return InformationPair{spec.interim_fraction * i2, i2};
}

StopDecision evaluate_stopping(const TwoStageDesign& design, double z1) {
  return z1 >= design.e1 ? StopDecision::stop_efficacy_stage1
                         : StopDecision::continue_to_stage2;
}

CanonicalParams canonical_params(double theta, const TwoStageDesign& design) {
  return CanonicalParams{theta * design.sqrt_i1(), theta * design.sqrt_i2(),
                         design.rho()};
}

}  // namespace gsest
