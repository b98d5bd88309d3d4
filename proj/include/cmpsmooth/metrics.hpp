#pragma once

#include <functional>
#include <optional>

#include "cmpsmooth/estimators.hpp"

namespace cmpsmooth {

// Sum of squared pmf differences over x = 0..cap. The estimate is 0 beyond
// its support; pick cap large enough to cover both pmfs' mass.
double ise(const PmfEstimate& est,
           const std::function<double(long long)>& truth, long long cap);

// P(X > threshold) under the estimate, as the upper sum plus tail_mass.
// Finite-support estimators therefore give exactly 0 past their support.
// Any threshold is valid; below 0 the result is the total mass.
double tail_probability(const PmfEstimate& est, long long threshold);

// A tail event: P(X > threshold), with threshold chosen as the level-q
// quantile of the true pmf.
struct TailQuery {
  double level = 0.99;
  long long threshold = 0;
};

// Order-of-magnitude error |log10 p_hat - log10 p_true| of a tail estimate.
// p_hat == 0 cannot be scored on the log scale and is flagged divergent.
struct RelativeErrorOutcome {
  std::optional<double> value;
  bool divergent() const { return !value.has_value(); }
};

// pre: p_hat >= 0, p_true > 0, both finite
RelativeErrorOutcome tail_relative_error(double p_hat, double p_true);

}  // namespace cmpsmooth
