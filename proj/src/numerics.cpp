#include "gsest/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gsest/errors.hpp"

namespace gsest::numerics {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kSqrt2Pi = 2.50662827463100050242;
constexpr double kTwoPi = 6.28318530717958647692;

}  // namespace

Interval::Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
  if (!(std::isfinite(lo) && std::isfinite(hi)) || !(lo < hi)) {
    throw std::invalid_argument("Interval: requires finite lo < hi");
  }
}

void SolverSettings::validate() const {
  if (!(abs_tol > 0.0)) {
    throw std::invalid_argument("SolverSettings: abs_tol must be > 0");
  }
  if (max_iterations < 1) {
    throw std::invalid_argument("SolverSettings: max_iterations must be >= 1");
  }
}

double std_normal_pdf(double x) {
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double std_normal_cdf(double x) {
  if (std::isinf(x)) {
    return x > 0.0 ? 1.0 : 0.0;
  }
  return 0.5 * std::erfc(-x * kInvSqrt2);
}

double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("std_normal_quantile: p must lie in (0, 1)");
  }

  // Rational initial estimate (Acklam), |relative error| < 1.2e-9.
  static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                  -2.759285104469687e+02, 1.383577518672690e+02,
                                  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                  -1.556989798598866e+02, 6.680131188771972e+01,
                                  -1.328068155288572e+01};
  static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                  -2.400758277161838e+00, -2.549732539343734e+00,
                                  4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                  2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // Two Halley refinements against the erfc-based cdf bring the estimate
  // to full double precision. Skipped in the extreme tail where the
  // density underflows (the estimate is already exact there in absolute
  // terms).
  for (int pass = 0; pass < 2; ++pass) {
    const double density = std_normal_pdf(x);
    if (density <= 0.0) {
      break;
    }
    const double err = std_normal_cdf(x) - p;
    const double u = err / density;
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

namespace {

// Gauss-Legendre nodes (negative half) and weights for 6, 12, 20 points.
constexpr double kGlX6[3] = {-0.9324695142031521, -0.6612093864662645,
                             -0.2386191860831969};
constexpr double kGlW6[3] = {0.1713244923791704, 0.3607615730481386,
                             0.4679139345726910};
constexpr double kGlX12[6] = {-0.9815606342467192, -0.9041172563704749,
                              -0.7699026741943047, -0.5873179542866175,
                              -0.3678314989981802, -0.1252334085114689};
constexpr double kGlW12[6] = {0.0471753363865118, 0.1069393259953184,
                              0.1600783285433462, 0.2031674267230659,
                              0.2334925365383548, 0.2491470458134028};
constexpr double kGlX20[10] = {-0.9931285991850949, -0.9639719272779138,
                               -0.9122344282513259, -0.8391169718222188,
                               -0.7463319064601508, -0.6360536807265150,
                               -0.5108670019508271, -0.3737060887154195,
                               -0.2277858511416451, -0.0765265211334973};
constexpr double kGlW20[10] = {0.0176140071391521, 0.0406014298003869,
                               0.0626720483341091, 0.0832767415767048,
                               0.1019301198172404, 0.1181945319615184,
                               0.1316886384491766, 0.1420961093183820,
                               0.1491729864726037, 0.1527533871307258};

// Upper-tail probability P(X > dh, Y > dk) for a standard bivariate
// normal pair with correlation r, after Drezner & Wesolowsky's single
// integral reduction with the Genz refinement for |r| near one.
double bvn_upper(double dh, double dk, double r) {
  const double* gx;
  const double* gw;
  int ng;
  const double ar = std::fabs(r);
  if (ar < 0.3) {
    gx = kGlX6;
    gw = kGlW6;
    ng = 3;
  } else if (ar < 0.75) {
    gx = kGlX12;
    gw = kGlW12;
    ng = 6;
  } else {
    gx = kGlX20;
    gw = kGlW20;
    ng = 10;
  }

  double h = dh;
  double k = dk;
  double hk = h * k;
  double bvn = 0.0;

  if (ar < 0.925) {
    if (ar > 0.0) {
      const double hs = 0.5 * (h * h + k * k);
      const double asr = std::asin(r);
      for (int i = 0; i < ng; ++i) {
        for (int is = -1; is <= 1; is += 2) {
          const double sn = std::sin(0.5 * asr * (is * gx[i] + 1.0));
          bvn += gw[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
        }
      }
      bvn = bvn * asr / (2.0 * kTwoPi);
    }
    bvn += std_normal_cdf(-h) * std_normal_cdf(-k);
  } else {
    if (r < 0.0) {
      k = -k;
      hk = -hk;
    }
    if (ar < 1.0) {
      const double as = (1.0 - r) * (1.0 + r);
      double a = std::sqrt(as);
      const double bs = (h - k) * (h - k);
      const double c = (4.0 - hk) / 8.0;
      const double d = (12.0 - hk) / 16.0;
      double asr = -0.5 * (bs / as + hk);
      if (asr > -100.0) {
        bvn = a * std::exp(asr) *
              (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 +
               c * d * as * as / 5.0);
      }
      if (-hk < 100.0) {
        const double bb = std::sqrt(bs);
        bvn -= std::exp(-0.5 * hk) * kSqrt2Pi * std_normal_cdf(-bb / a) * bb *
               (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
      }
      a *= 0.5;
      for (int i = 0; i < ng; ++i) {
        for (int is = -1; is <= 1; is += 2) {
          const double x = a * (is * gx[i] + 1.0);
          const double xs = x * x;
          const double rs = std::sqrt(1.0 - xs);
          asr = -0.5 * (bs / xs + hk);
          if (asr > -100.0) {
            const double sp = 1.0 + c * xs * (1.0 + d * xs);
            const double ep =
                std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs;
            bvn += a * gw[i] * std::exp(asr) * (ep - sp);
          }
        }
      }
      bvn = -bvn / kTwoPi;
    }
    if (r > 0.0) {
      bvn += std_normal_cdf(-std::max(h, k));
    } else {
      bvn = -bvn;
      if (k > h) {
        bvn += std_normal_cdf(k) - std_normal_cdf(h);
      }
    }
  }
  return std::clamp(bvn, 0.0, 1.0);
}

}  // namespace

double bivariate_normal_cdf(double h, double k, double rho) {
  if (!(std::fabs(rho) < 1.0)) {
    throw std::domain_error("bivariate_normal_cdf: requires |rho| < 1");
  }
  if (std::isinf(h) || std::isinf(k)) {
    if ((std::isinf(h) && h < 0.0) || (std::isinf(k) && k < 0.0)) {
      return 0.0;
    }
    if (std::isinf(h) && std::isinf(k)) {
      return 1.0;
    }
    return std::isinf(h) ? std_normal_cdf(k) : std_normal_cdf(h);
  }
  return bvn_upper(-h, -k, rho);
}

double inverse_mills_ratio(double u) {
  if (u <= 8.0) {
    return std_normal_pdf(u) / std_normal_cdf(-u);
  }
  // Mills ratio continued fraction 1/(u + 1/(u + 2/(u + ...))),
  // evaluated by backward recurrence; rapidly convergent for u > 8.
  double t = 0.0;
  for (int k = 60; k >= 1; --k) {
    t = static_cast<double>(k) / (u + t);
  }
  return u + t;
}

double truncated_normal_mean(double mu, double sigma, TruncationSide side,
                             double cut) {
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("truncated_normal_mean: sigma must be > 0");
  }
  const double u = (cut - mu) / sigma;
  if (side == TruncationSide::above_cut) {
    if (std::isinf(u) && u < 0.0) {
      return mu;  // no truncation
    }
    return mu + sigma * inverse_mills_ratio(u);
  }
  if (std::isinf(u) && u > 0.0) {
    return mu;
  }
  return mu - sigma * inverse_mills_ratio(-u);
}

double find_root(const std::function<double(double)>& f, Interval bracket,
                 SolverSettings settings) {
  settings.validate();

  double a = bracket.lo;
  double b = bracket.hi;
  double fa = f(a);
  double fb = f(b);
  if (fa == 0.0) {
    return a;
  }
  if (fb == 0.0) {
    return b;
  }
  if ((fa > 0.0) == (fb > 0.0)) {
    throw SolverError("find_root: no sign change over bracket");
  }

  // Brent's method: inverse quadratic / secant steps guarded by bisection.
  double c = a;
  double fc = fa;
  double d = b - a;
  double e = d;
  for (int iter = 0; iter < settings.max_iterations; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
    if (std::fabs(fc) < std::fabs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 =
        2.0 * std::numeric_limits<double>::epsilon() * std::fabs(b) +
        0.5 * settings.abs_tol;
    const double xm = 0.5 * (c - b);
    if (std::fabs(xm) <= tol1 || fb == 0.0) {
      return b;
    }
    if (std::fabs(e) >= tol1 && std::fabs(fa) > std::fabs(fb)) {
      double p;
      double q;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qq = fa / fc;
        const double rr = fb / fc;
        p = s * (2.0 * xm * qq * (qq - rr) - (b - a) * (rr - 1.0));
        q = (qq - 1.0) * (rr - 1.0) * (s - 1.0);
      }
      if (p > 0.0) {
        q = -q;
      }
      p = std::fabs(p);
      const double min1 = 3.0 * xm * q - std::fabs(tol1 * q);
      const double min2 = std::fabs(e * q);
      if (2.0 * p < std::min(min1, min2)) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    if (std::fabs(d) > tol1) {
      b += d;
    } else {
      b += xm > 0.0 ? tol1 : -tol1;
    }
    fb = f(b);
    if (fb == 0.0) {
      return b;
    }
  }
  throw SolverError("find_root: no convergence within max_iterations");
}

double solve_fixed_point(const std::function<double(double)>& g, double start,
                         SolverSettings settings,
                         const Interval* fallback_bracket) {
  settings.validate();

  double x = start;
  for (int iter = 0; iter < settings.max_iterations; ++iter) {
    const double gx = g(x);
    if (!std::isfinite(gx)) {
      break;
    }
    const double residual = x - gx;
    if (std::fabs(residual) <= settings.abs_tol) {
      return x;
    }
    if (std::fabs(residual) > 1e100) {
      break;  // clearly diverging, switch to the bracketed fallback
    }
    x = gx;
  }

  const auto h = [&g](double t) { return t - g(t); };
  SolverSettings root_settings = settings;
  root_settings.abs_tol = settings.abs_tol * 1e-3;

  auto try_bracket = [&](const Interval& br) -> bool {
    const double hl = h(br.lo);
    const double hh = h(br.hi);
    return std::isfinite(hl) && std::isfinite(hh) &&
           ((hl <= 0.0 && hh >= 0.0) || (hl >= 0.0 && hh <= 0.0));
  };

  const Interval* chosen = nullptr;
  Interval expanded(start - 1.0, start + 1.0);
  if (fallback_bracket != nullptr && try_bracket(*fallback_bracket)) {
    chosen = fallback_bracket;
  } else {
    // Expansion is capped near 1e6x the start scale; beyond that a "sign
    // change" is more likely a floating-point artifact than a fixed point.
    double width = std::max(1.0, std::fabs(start));
    bool found = false;
    for (int round = 0; round < 21; ++round) {
      expanded = Interval(start - width, start + width);
      if (try_bracket(expanded)) {
        found = true;
        break;
      }
      width *= 2.0;
    }
    if (found) {
      chosen = &expanded;
    }
  }
  if (chosen == nullptr) {
    throw SolverError(
        "solve_fixed_point: iteration did not converge and no sign change "
        "was found for the bracketed fallback");
  }

  const double root = find_root(h, *chosen, root_settings);
  if (std::fabs(h(root)) > settings.abs_tol) {
    throw SolverError("solve_fixed_point: fallback root does not meet the "
                      "residual tolerance");
  }
  return root;
}

}  // namespace gsest::numerics
