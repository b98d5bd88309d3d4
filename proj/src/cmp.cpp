#include "cmpsmooth/cmp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "cmpsmooth/errors.hpp"
#include "cmpsmooth/numerics.hpp"

namespace cmpsmooth {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct SeriesStats {
  double log_z = 0.0;
  int truncation_point = 0;
  double mean = 0.0;
  double variance = 0.0;
};

enum class SeriesOutcome { ok, overflow };

// One pass over the series lambda^x/(x!)^nu, accumulating S0 = sum w,
// S1 = sum x*w, S2 = sum x^2*w with terms scaled by the running maximum.
// Log-terms are computed directly (not incrementally) from the shared
// log-factorial table so that Z and cmp_log_pmf agree to table precision.
SeriesOutcome series_pass(double log_lambda, double nu, const SeriesConfig& cfg,
                          SeriesStats& out) {
  double max_t = 0.0;  // x = 0 term has log-term 0
  double s0 = 1.0;
  double s1 = 0.0;
  double s2 = 0.0;
  double prev_t = 0.0;
  bool past_mode = false;
  long long x = 1;
  for (; x <= cfg.max_terms; ++x) {
    const double xd = static_cast<double>(x);
    const double t = xd * log_lambda - nu * log_factorial(x);
    if (t < prev_t) past_mode = true;
    prev_t = t;
    if (t > max_t) {
      // new peak: rescale previous sums to the new anchor
      const double rescale = std::exp(max_t - t);
      s0 = s0 * rescale + 1.0;
      s1 = s1 * rescale + xd;
      s2 = s2 * rescale + xd * xd;
      max_t = t;
    } else {
      const double w = std::exp(t - max_t);
      // stop once, past the mode, the term is rel_term_floor below the
      // running sum; the triggering term is excluded
      if (past_mode && w < s0 * cfg.rel_term_floor) break;
      s0 += w;
      s1 += w * xd;
      s2 += w * xd * xd;
    }
  }
  if (x > cfg.max_terms) return SeriesOutcome::overflow;
  out.log_z = max_t + std::log(s0);
  out.truncation_point = static_cast<int>(x - 1);
  out.mean = s1 / s0;
  out.variance = std::max(0.0, s2 / s0 - out.mean * out.mean);
  return SeriesOutcome::ok;
}

struct SolveOutput {
  double y;  // log lambda
  SeriesStats st;
};

SolveOutput solve_log_lambda_full(double mu, double nu,
                                  const SeriesConfig& cfg) {
  cfg.validate();
  if (!std::isfinite(mu) || mu < 0.0) {
    throw domain_error("solve_lambda: mu must be finite and >= 0, got " +
                       fmt(mu));
  }
  if (!std::isfinite(nu) || nu <= 0.0) {
    throw domain_error("solve_lambda: nu must be finite and > 0, got " +
                       fmt(nu));
  }
  if (mu == 0.0) return {kNegInf, SeriesStats{0.0, 0, 0.0, 0.0}};
  if (nu == 1.0) {
    // Poisson case: the rate equals the mean exactly
    const double y = std::log(mu);
    SeriesStats st;
    if (series_pass(y, nu, cfg, st) == SeriesOutcome::overflow) {
      throw convergence_error("normalizing series exceeded " +
                              std::to_string(cfg.max_terms) +
                              " terms at lambda=" + fmt(mu) + ", nu=1");
    }
    return {y, st};
  }

  const double scale = std::max(1.0, mu);
  const double target = scale * std::min(cfg.mean_tol, 1e-12);
  const double accept = scale * cfg.mean_tol;

  // mean(y) is strictly increasing: d mean / d log lambda = variance.
  // Overflowing the series budget means the mode ran past max_terms, which
  // only happens when the mean is far above any mu we solve for; treat it
  // as mean = +inf so the bracket logic stays sound.
  auto eval = [&](double y, SeriesStats& st) -> double {
    if (series_pass(y, nu, cfg, st) == SeriesOutcome::overflow) return kPosInf;
    return st.mean - mu;
  };

  double best_y = 0.0;
  double best_f = kPosInf;
  SeriesStats best_st;
  bool have_best = false;
  auto consider = [&](double y, double f, const SeriesStats& st) {
    if (!std::isfinite(f)) return;
    if (!have_best || std::abs(f) < std::abs(best_f)) {
      best_y = y;
      best_f = f;
      best_st = st;
      have_best = true;
    }
  };

  // seed at the large-nu asymptotic lambda ~ (mu + (nu-1)/(2nu))^nu,
  // clipped away from zero
  const double base = mu + (nu - 1.0) / (2.0 * nu);
  double y0 = base > 0.0 ? nu * std::log(base) : std::log(1e-12);
  y0 = std::max(y0, std::log(1e-12));

  SeriesStats st0;
  double f0 = eval(y0, st0);
  if (std::isnan(f0)) {
    throw convergence_error("lambda solve produced NaN at mu=" + fmt(mu) +
                            ", nu=" + fmt(nu));
  }
  consider(y0, f0, st0);
  if (std::abs(f0) <= target) return {y0, st0};

  // geometric expansion to a sign-changing bracket [lo, hi]
  double lo, hi;
  double step = 0.5;
  int guard = 0;
  if (f0 < 0.0) {
    double cur = y0;
    for (;;) {
      if (++guard > 200) {
        throw convergence_error("lambda solve found no upper bracket at mu=" +
                                fmt(mu) + ", nu=" + fmt(nu));
      }
      const double nxt = cur + step;
      SeriesStats st2;
      const double f2 = eval(nxt, st2);
      consider(nxt, f2, st2);
      if (std::isfinite(f2) && std::abs(f2) <= target) return {nxt, st2};
      if (f2 >= 0.0) {
        lo = cur;
        hi = nxt;
        break;
      }
      cur = nxt;
      step *= 2.0;
    }
  } else {
    double cur = y0;
    for (;;) {
      if (++guard > 200) {
        throw convergence_error("lambda solve found no lower bracket at mu=" +
                                fmt(mu) + ", nu=" + fmt(nu));
      }
      const double nxt = cur - step;
      SeriesStats st2;
      const double f2 = eval(nxt, st2);
      consider(nxt, f2, st2);
      if (std::isfinite(f2) && std::abs(f2) <= target) return {nxt, st2};
      if (f2 < 0.0) {
        lo = nxt;
        hi = cur;
        break;
      }
      cur = nxt;
      step *= 2.0;
    }
  }

  // Newton safeguarded by the bracket; falls back to bisection whenever the
  // Newton step leaves [lo, hi] or the last evaluation was non-finite
  double last_y = best_y;
  double last_f = have_best ? best_f : kPosInf;
  double last_var = have_best ? best_st.variance : 0.0;
  for (int it = 0; it < 100; ++it) {
    double y_try = last_y - last_f / std::max(last_var, 1e-300);
    if (!std::isfinite(y_try) || y_try <= lo || y_try >= hi) {
      y_try = 0.5 * (lo + hi);
    }
    SeriesStats st_try;
    const double f_try = eval(y_try, st_try);
    if (std::isnan(f_try)) {
      throw convergence_error("lambda solve produced NaN at mu=" + fmt(mu) +
                              ", nu=" + fmt(nu));
    }
    consider(y_try, f_try, st_try);
    if (std::isfinite(f_try) && std::abs(f_try) <= target) {
      return {y_try, st_try};
    }
    if (f_try < 0.0) {
      lo = y_try;
    } else {
      hi = y_try;
    }
    last_y = y_try;
    last_f = f_try;
    last_var = st_try.variance;
    if (hi - lo <= 1e-14 * (1.0 + std::abs(lo) + std::abs(hi))) break;
  }
  if (have_best && std::abs(best_f) <= accept) return {best_y, best_st};
  throw convergence_error("lambda solve did not converge at mu=" + fmt(mu) +
                          ", nu=" + fmt(nu));
}

}  // namespace

void SeriesConfig::validate() const {
  if (!(rel_term_floor > 0.0) || !(rel_term_floor < 1.0)) {
    throw domain_error("SeriesConfig: rel_term_floor must be in (0, 1)");
  }
  if (max_terms < 10) {
    throw domain_error("SeriesConfig: max_terms must be >= 10");
  }
  if (!(mean_tol > 0.0) || !std::isfinite(mean_tol)) {
    throw domain_error("SeriesConfig: mean_tol must be finite and > 0");
  }
}

LogZResult log_normalizing_constant_log_lambda(double log_lambda, double nu,
                                               const SeriesConfig& cfg) {
  cfg.validate();
  if (std::isnan(log_lambda) || log_lambda == kPosInf) {
    throw domain_error("log_normalizing_constant: log lambda must be < +inf");
  }
  if (!std::isfinite(nu) || nu <= 0.0) {
    throw domain_error("log_normalizing_constant: nu must be finite and > 0");
  }
  if (log_lambda == kNegInf) return {0.0, 0};  // only the x = 0 term
  SeriesStats st;
  if (series_pass(log_lambda, nu, cfg, st) == SeriesOutcome::overflow) {
    throw convergence_error("normalizing series exceeded " +
                            std::to_string(cfg.max_terms) +
                            " terms at log_lambda=" + fmt(log_lambda) +
                            ", nu=" + fmt(nu));
  }
  return {st.log_z, st.truncation_point};
}

LogZResult log_normalizing_constant(double lambda, double nu,
                                    const SeriesConfig& cfg) {
  if (!std::isfinite(lambda) || lambda < 0.0) {
    throw domain_error("log_normalizing_constant: lambda must be finite and >= 0");
  }
  const double ll = lambda == 0.0 ? kNegInf : std::log(lambda);
  return log_normalizing_constant_log_lambda(ll, nu, cfg);
}

double solve_log_lambda(double mu, double nu, const SeriesConfig& cfg) {
  return solve_log_lambda_full(mu, nu, cfg).y;
}

double solve_lambda(double mu, double nu, const SeriesConfig& cfg) {
  return std::exp(solve_log_lambda(mu, nu, cfg));
}

CmpKernel make_kernel_nu(double mu, double nu, const SeriesConfig& cfg) {
  const SolveOutput sol = solve_log_lambda_full(mu, nu, cfg);
  CmpKernel k;
  k.mu = mu;
  k.nu = nu;
  k.log_lambda = sol.y;
  k.lambda = std::exp(sol.y);  // may round to +inf for extreme (mu, nu)
  k.log_z = sol.st.log_z;
  k.truncation_point = sol.st.truncation_point;
  k.mean = sol.st.mean;
  k.variance = sol.st.variance;
  return k;
}

CmpKernel make_kernel(double mu, double h, const SeriesConfig& cfg) {
  cfg.validate();
  if (!std::isfinite(h) || h < 0.0) {
    throw domain_error("make_kernel: bandwidth h must be finite and >= 0");
  }
  if (!std::isfinite(mu) || mu < 0.0) {
    throw domain_error("make_kernel: mu must be finite and >= 0");
  }
  if (h <= kBandwidthFloor) {
    // degenerate regime: exact point mass, no series
    CmpKernel k;
    k.mu = mu;
    k.nu = kNuMax;
    k.dirac = true;
    k.dirac_point = round_half_even(mu);
    // lambda fields record the nu -> inf limit; the pmf never reads them
    k.log_lambda = k.dirac_point == 0 ? kNegInf : kPosInf;
    k.lambda = k.dirac_point == 0 ? 0.0 : kPosInf;
    k.log_z = 0.0;
    k.truncation_point = static_cast<int>(k.dirac_point);
    k.mean = static_cast<double>(k.dirac_point);
    k.variance = 0.0;
    return k;
  }
  const double nu = std::clamp(1.0 / h, kNuMin, kNuMax);
  return make_kernel_nu(mu, nu, cfg);
}

double cmp_log_pmf(const CmpKernel& k, long long x) {
  if (x < 0) throw domain_error("cmp_log_pmf: x must be >= 0");
  if (k.dirac) return x == k.dirac_point ? 0.0 : kNegInf;
  if (x == 0) return -k.log_z;
  if (k.log_lambda == kNegInf) return kNegInf;
  return static_cast<double>(x) * k.log_lambda - k.nu * log_factorial(x) -
         k.log_z;
}

double cmp_pmf(const CmpKernel& k, long long x) {
  const double lp = cmp_log_pmf(k, x);
  return lp == kNegInf ? 0.0 : std::exp(lp);
}

std::pair<double, double> cmp_moments(const CmpKernel& k) {
  return {k.mean, k.variance};
}

}  // namespace cmpsmooth
