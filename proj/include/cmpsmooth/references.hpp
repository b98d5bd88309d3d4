#pragma once

#include <optional>

#include "cmpsmooth/sample.hpp"

namespace cmpsmooth {

// Parametric reference fits used by the bandwidth selector as plausible
// global shapes: a smoothed estimate should not drift arbitrarily far from
// both of them.

// Maximum-likelihood Poisson: lambda = X-bar.
struct PoissonRef {
  double lambda = 0.0;
  double log_pmf(long long x) const;
  double pmf(long long x) const;
  long long quantile(double p) const;  // smallest x with CDF >= p, p in (0,1)
};

// Method-of-moments negative binomial: mu = X-bar, r = X-bar^2/(S^2 - X-bar).
struct NegBinRef {
  double mu = 0.0;
  double r = 0.0;
  double log_pmf(long long x) const;
  double pmf(long long x) const;
  long long quantile(double p) const;
};

PoissonRef fit_reference_poisson(const CountSample& sample);

// Unavailable when the sample shows no overdispersion (S^2 <= X-bar) or is
// all zeros.
std::optional<NegBinRef> fit_reference_nb(const CountSample& sample);

}  // namespace cmpsmooth
