#include "cmpsmooth/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "cmpsmooth/errors.hpp"
#include "cmpsmooth/numerics.hpp"

namespace cmpsmooth {

double ise(const PmfEstimate& est,
           const std::function<double(long long)>& truth, long long cap) {
  if (cap < 0) throw domain_error("ise: cap must be >= 0");
  CompensatedSum s;
  for (long long x = 0; x <= cap; ++x) {
    const double d = est.prob(x) - truth(x);
    s.add(d * d);
  }
  return s.value();
}

double tail_probability(const PmfEstimate& est, long long threshold) {
  CompensatedSum s;
  for (long long x = std::max(threshold + 1, 0LL); x <= est.x_max; ++x) {
    s.add(est.probs[static_cast<std::size_t>(x)]);
  }
  s.add(est.tail_mass);
  return std::clamp(s.value(), 0.0, 1.0);
}

RelativeErrorOutcome tail_relative_error(double p_hat, double p_true) {
  if (!std::isfinite(p_hat) || p_hat < 0.0) {
    throw domain_error("tail_relative_error: p_hat must be finite and >= 0");
  }
  if (!std::isfinite(p_true) || p_true <= 0.0) {
    throw domain_error("tail_relative_error: p_true must be finite and > 0");
  }
  if (p_hat == 0.0) return {};
  return {std::abs(std::log10(p_hat) - std::log10(p_true))};
}

}  // namespace cmpsmooth
