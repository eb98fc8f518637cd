#pragma once

#include <functional>

namespace gsest::numerics {

// Bracket for root solvers. Requires lo < hi, both finite.
struct Interval {
  double lo;
  double hi;

  Interval(double lo_, double hi_);
};

struct SolverSettings {
  double abs_tol = 1e-10;
  int max_iterations = 200;

  void validate() const;
};

// Standard normal density (2*pi)^(-1/2) * exp(-x^2/2).
double std_normal_pdf(double x);

// Standard normal distribution function. Accepts +/-infinity.
double std_normal_cdf(double x);

// Inverse of std_normal_cdf on (0, 1). Throws std::domain_error outside.
double std_normal_quantile(double p);

// P(X1 <= h, X2 <= k) for a standard bivariate normal pair with
// correlation rho, |rho| < 1. h and k may be +/-infinity.
double bivariate_normal_cdf(double h, double k, double rho);

// Hazard ratio phi(u) / (1 - Phi(u)), stable over the whole real line.
// Switches to a continued-fraction evaluation of the Mills ratio for
// u > 8 where the direct quotient degrades.
double inverse_mills_ratio(double u);

enum class TruncationSide { below_cut, above_cut };

// Mean of a Normal(mu, sigma^2) truncated to one side of `cut`.
// above_cut keeps {X >= cut}, below_cut keeps {X <= cut}.
double truncated_normal_mean(double mu, double sigma, TruncationSide side,
                             double cut);

// Bracketed root finding (Brent). Requires a sign change over the
// bracket; throws SolverError otherwise or if max_iterations is hit.
double find_root(const std::function<double(double)>& f, Interval bracket,
                 SolverSettings settings = {});

// Fixed point of g: returns x with |x - g(x)| <= abs_tol. Plain iteration
// from `start`, falling back to find_root on x - g(x) over
// `fallback_bracket` (auto-expanded around `start` when not supplied or
// when it shows no sign change).
double solve_fixed_point(const std::function<double(double)>& g, double start,
                         SolverSettings settings = {},
                         const Interval* fallback_bracket = nullptr);

}  // namespace gsest::numerics
