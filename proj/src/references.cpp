#include "cmpsmooth/references.hpp"

#include <cmath>
#include <functional>

#include "cmpsmooth/errors.hpp"
#include "cmpsmooth/numerics.hpp"

namespace cmpsmooth {

namespace {

// Smallest x with CDF >= p, by walking the pmf.
long long quantile_walk(double p, double pmf0,
                        const std::function<double(long long, double)>& step) {
  if (!(p > 0.0) || !(p < 1.0)) {
    throw domain_error("quantile: p must be in (0, 1)");
  }
  CompensatedSum cum;
  double term = pmf0;
  long long x = 0;
  for (;;) {
    cum.add(term);
    if (cum.value() >= p) return x;
    if (x > 100000000) {
      throw convergence_error("quantile walk ran past 1e8");
    }
    term = step(x, term);
    ++x;
  }
}

}  // namespace

double PoissonRef::log_pmf(long long x) const {
  if (x < 0) throw domain_error("log_pmf: x must be >= 0");
  if (lambda == 0.0) return x == 0 ? 0.0 : kNegInf;
  return static_cast<double>(x) * std::log(lambda) - lambda -
         log_factorial(x);
}

double PoissonRef::pmf(long long x) const {
  const double lp = log_pmf(x);
  return lp == kNegInf ? 0.0 : std::exp(lp);
}

long long PoissonRef::quantile(double p) const {
  if (lambda == 0.0) return 0;
  return quantile_walk(p, std::exp(-lambda), [this](long long x, double t) {
    return t * lambda / static_cast<double>(x + 1);
  });
}

double NegBinRef::log_pmf(long long x) const {
  if (x < 0) throw domain_error("log_pmf: x must be >= 0");
  return std::lgamma(static_cast<double>(x) + r) - std::lgamma(r) -
         log_factorial(x) + r * std::log(r / (r + mu)) +
         static_cast<double>(x) * std::log(mu / (r + mu));
}

double NegBinRef::pmf(long long x) const { return std::exp(log_pmf(x)); }

long long NegBinRef::quantile(double p) const {
  const double ratio = mu / (r + mu);
  return quantile_walk(
      p, std::exp(r * std::log(r / (r + mu))),
      [this, ratio](long long x, double t) {
        return t * (static_cast<double>(x) + r) /
               static_cast<double>(x + 1) * ratio;
      });
}

PoissonRef fit_reference_poisson(const CountSample& sample) {
  return PoissonRef{sample.mean()};
}

std::optional<NegBinRef> fit_reference_nb(const CountSample& sample) {
  const double m = sample.mean();
  const double s2 = sample.variance();
  if (m <= 0.0 || s2 <= m) return std::nullopt;
  return NegBinRef{m, m * m / (s2 - m)};
}

}  // namespace cmpsmooth
