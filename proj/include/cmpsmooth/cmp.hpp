#pragma once

#include <utility>

namespace cmpsmooth {

// Mean-parametrized Conway-Maxwell-Poisson (CMP) kernels.
//
// pmf(x) = lambda^x / ((x!)^nu * Z(lambda, nu)),  Z = sum_x lambda^x/(x!)^nu.
// lambda is chosen so that E[X] = mu; nu controls dispersion (nu < 1 over-,
// nu = 1 Poisson, nu > 1 under-dispersed). As nu grows the kernel contracts
// to a point mass at mu, which is what makes it usable as a smoothing kernel
// whose mean never drifts from its center.
//
// All probability arithmetic is done in log space. lambda itself can
// overflow double (log lambda up to nu*log mu), so the solver and the pmf
// work on log lambda throughout.

// Truncation and convergence policy for the normalizing series.
struct SeriesConfig {
  // Stop, past the mode, once a term falls below rel_term_floor times the
  // running sum (exp(-36) keeps ~1e-12 of relative tail mass at worst).
  double rel_term_floor = 2.319522830243569e-16;
  int max_terms = 100000;
  // Mean-constraint tolerance, relative to max(1, mu).
  double mean_tol = 1e-8;

  void validate() const;  // throws domain_error on nonsense values
};

// Bandwidth-to-dispersion mapping: nu = 1/h clamped into [kNuMin, kNuMax];
// at or below kBandwidthFloor the kernel degenerates to a point mass.
inline constexpr double kNuMin = 0.02;
inline constexpr double kNuMax = 1e4;
inline constexpr double kBandwidthFloor = 1e-4;

struct LogZResult {
  double log_z;
  int truncation_point;  // largest x included in the sum
};

// log Z(lambda, nu). Throws domain_error on bad arguments, convergence_error
// when max_terms is exhausted before the tail dies.
LogZResult log_normalizing_constant(double lambda, double nu,
                                    const SeriesConfig& cfg = {});
LogZResult log_normalizing_constant_log_lambda(double log_lambda, double nu,
                                               const SeriesConfig& cfg = {});

// Solve the mean constraint sum_x (x - mu) lambda^x/(x!)^nu = 0 for lambda.
// Guarantee: |E[X] - mu| <= cfg.mean_tol * max(1, mu) (typically far
// tighter). solve_lambda returns exp of the log solution and may be +inf for
// extreme (mu, nu); solve_log_lambda is the overflow-safe form.
double solve_lambda(double mu, double nu, const SeriesConfig& cfg = {});
double solve_log_lambda(double mu, double nu, const SeriesConfig& cfg = {});

// A fully materialized kernel: solved rate, normalizer, truncated-support
// moments. dirac marks the h <= kBandwidthFloor short-circuit where the
// kernel is an exact point mass and no series is evaluated.
struct CmpKernel {
  double mu = 0.0;
  double nu = 1.0;
  double lambda = 0.0;      // exp(log_lambda); +inf when it overflows double
  double log_lambda = 0.0;  // -inf iff mu == 0
  double log_z = 0.0;
  int truncation_point = 0;
  double mean = 0.0;      // over the truncated support
  double variance = 0.0;  // nonnegative (clamped against cancellation)
  bool dirac = false;
  long long dirac_point = 0;
};

// Kernel centered at mu with bandwidth h >= 0 (nu = 1/h, clamped).
CmpKernel make_kernel(double mu, double h, const SeriesConfig& cfg = {});
// Kernel with dispersion given directly; used by tests and diagnostics.
CmpKernel make_kernel_nu(double mu, double nu, const SeriesConfig& cfg = {});

// log pmf / pmf at integer x >= 0.
double cmp_log_pmf(const CmpKernel& k, long long x);
double cmp_pmf(const CmpKernel& k, long long x);

// (mean, variance) over the truncated support.
std::pair<double, double> cmp_moments(const CmpKernel& k);

}  // namespace cmpsmooth
