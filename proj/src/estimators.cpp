#include "cmpsmooth/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "cmpsmooth/errors.hpp"
#include "cmpsmooth/numerics.hpp"

namespace cmpsmooth {

namespace {

void validate_rule(const SupportRule& rule) {
  if (rule.fixed_max && *rule.fixed_max < 0) {
    throw domain_error("SupportRule: fixed_max must be >= 0");
  }
  if (!(rule.tail_tol > 0.0) || !(rule.tail_tol < 1.0)) {
    throw domain_error("SupportRule: tail_tol must be in (0, 1)");
  }
  if (rule.min_margin < 0) {
    throw domain_error("SupportRule: min_margin must be >= 0");
  }
}

// Binomial(m, p) pmf over 0..m. Exact Pascal-row coefficients while they fit
// in 64 bits, lgamma beyond.
std::vector<double> binomial_pmf_row(long long m, double p) {
  std::vector<double> out(static_cast<std::size_t>(m) + 1, 0.0);
  if (p <= 0.0) {
    out[0] = 1.0;
    return out;
  }
  if (p >= 1.0) {
    out.back() = 1.0;
    return out;
  }
  const double q = 1.0 - p;
  if (m <= 60) {
    std::vector<double> coef(static_cast<std::size_t>(m) + 1);
    long long c = 1;  // c*(m-x) stays below 2^63 for m <= 60
    for (long long x = 0; x <= m; ++x) {
      coef[static_cast<std::size_t>(x)] = static_cast<double>(c);
      if (x < m) c = c * (m - x) / (x + 1);
    }
    for (long long x = 0; x <= m; ++x) {
      out[static_cast<std::size_t>(x)] =
          coef[static_cast<std::size_t>(x)] *
          std::pow(p, static_cast<double>(x)) *
          std::pow(q, static_cast<double>(m - x));
    }
    return out;
  }
  const double lp = std::log(p);
  const double lq = std::log(q);
  const double lfm = log_factorial(m);
  for (long long x = 0; x <= m; ++x) {
    const double lt = lfm - log_factorial(x) - log_factorial(m - x) +
                      static_cast<double>(x) * lp +
                      static_cast<double>(m - x) * lq;
    out[static_cast<std::size_t>(x)] = std::exp(lt);
  }
  return out;
}

}  // namespace

const char* estimator_name(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::histogram: return "histogram";
    case EstimatorKind::cmp: return "cmp";
    case EstimatorKind::triangular: return "triangular";
    case EstimatorKind::binomial: return "binomial";
  }
  return "unknown";
}

PmfEstimate fit_histogram(const CountSample& sample) {
  PmfEstimate est;
  est.estimator = EstimatorKind::histogram;
  est.x_max = sample.max_value();
  est.probs.assign(static_cast<std::size_t>(est.x_max) + 1, 0.0);
  const double n = static_cast<double>(sample.n());
  for (const auto& [v, c] : sample.distinct()) {
    est.probs[static_cast<std::size_t>(v)] = static_cast<double>(c) / n;
  }
  CompensatedSum mean;
  for (const auto& [v, c] : sample.distinct()) {
    mean.add(static_cast<double>(v) * est.probs[static_cast<std::size_t>(v)]);
  }
  est.mean = mean.value();
  est.tail_mass = 0.0;
  return est;
}

PmfEstimate fit_cmp_dak(const CountSample& sample, double h,
                        const SeriesConfig& cfg, const SupportRule& rule) {
  validate_rule(rule);
  const auto& distinct = sample.distinct();
  std::vector<CmpKernel> kernels;
  kernels.reserve(distinct.size());
  for (const auto& [v, c] : distinct) {
    kernels.push_back(make_kernel(static_cast<double>(v), h, cfg));
  }

  long long x_hi;
  if (rule.fixed_max) {
    x_hi = *rule.fixed_max;
  } else {
    x_hi = sample.max_value() + rule.min_margin;
    for (const CmpKernel& k : kernels) {
      x_hi = std::max(x_hi, static_cast<long long>(k.truncation_point));
    }
  }

  PmfEstimate est;
  est.estimator = EstimatorKind::cmp;
  est.bandwidth = h;
  est.probs.assign(static_cast<std::size_t>(x_hi) + 1, 0.0);
  const double n = static_cast<double>(sample.n());
  for (std::size_t u = 0; u < distinct.size(); ++u) {
    const double w = static_cast<double>(distinct[u].second) / n;
    const CmpKernel& k = kernels[u];
    if (k.dirac) {
      if (k.dirac_point <= x_hi) {
        est.probs[static_cast<std::size_t>(k.dirac_point)] += w;
      }
      continue;
    }
    for (long long x = 0; x <= x_hi; ++x) {
      est.probs[static_cast<std::size_t>(x)] += w * cmp_pmf(k, x);
    }
  }

  if (!rule.fixed_max) {
    // trim to the smallest support holding 1 - tail_tol of the mass,
    // never below max_value + min_margin
    const long long floor_idx = sample.max_value() + rule.min_margin;
    CompensatedSum cum;
    long long cut = x_hi;
    for (long long x = 0; x <= x_hi; ++x) {
      cum.add(est.probs[static_cast<std::size_t>(x)]);
      if (x >= floor_idx && cum.value() >= 1.0 - rule.tail_tol) {
        cut = x;
        break;
      }
    }
    est.probs.resize(static_cast<std::size_t>(cut) + 1);
  }
  est.x_max = static_cast<long long>(est.probs.size()) - 1;

  CompensatedSum total;
  for (double p : est.probs) total.add(p);
  est.tail_mass = std::max(0.0, 1.0 - total.value());

  // exact estimator mean: kernels preserve their centers
  CompensatedSum mean;
  for (std::size_t u = 0; u < distinct.size(); ++u) {
    mean.add(static_cast<double>(distinct[u].second) / n * kernels[u].mean);
  }
  est.mean = mean.value();
  return est;
}

std::vector<double> triangular_kernel_weights(const TriangularKernelSpec& spec) {
  if (spec.arm < 0) {
    throw domain_error("triangular kernel: arm must be >= 0");
  }
  if (!std::isfinite(spec.h) || spec.h < 0.0) {
    throw domain_error("triangular kernel: h must be finite and >= 0");
  }
  const double peak = std::pow(static_cast<double>(spec.arm) + 1.0, spec.h);
  std::vector<double> w(static_cast<std::size_t>(2 * spec.arm) + 1);
  CompensatedSum sum;
  for (long long d = -spec.arm; d <= spec.arm; ++d) {
    // 0^h = 0 by convention, so h = 0 degenerates to a point mass
    const double off =
        d == 0 ? 0.0 : std::pow(std::abs(static_cast<double>(d)), spec.h);
    const double raw = peak - off;
    w[static_cast<std::size_t>(d + spec.arm)] = raw;
    sum.add(raw);
  }
  const double total = sum.value();
  for (double& x : w) x /= total;
  return w;
}

PmfEstimate fit_triangular_dak(const CountSample& sample,
                               const TriangularKernelSpec& spec) {
  const std::vector<double> weights = triangular_kernel_weights(spec);
  const long long arm = spec.arm;
  PmfEstimate est;
  est.estimator = EstimatorKind::triangular;
  est.bandwidth = spec.h;
  est.x_max = sample.max_value() + arm;
  est.probs.assign(static_cast<std::size_t>(est.x_max) + 1, 0.0);

  const double n = static_cast<double>(sample.n());
  double lost = 0.0;  // mass placed below zero, exactly 0.0 if none
  for (const auto& [v, c] : sample.distinct()) {
    const double w = static_cast<double>(c) / n;
    for (long long d = -arm; d <= arm; ++d) {
      const double m = w * weights[static_cast<std::size_t>(d + arm)];
      if (v + d < 0) {
        lost += m;
      } else {
        est.probs[static_cast<std::size_t>(v + d)] += m;
      }
    }
  }
  if (lost > 0.0) {
    CompensatedSum total;
    for (double p : est.probs) total.add(p);
    const double t = total.value();
    for (double& p : est.probs) p /= t;
  }

  CompensatedSum mean;
  for (long long x = 0; x <= est.x_max; ++x) {
    mean.add(static_cast<double>(x) * est.probs[static_cast<std::size_t>(x)]);
  }
  est.mean = mean.value();
  est.tail_mass = 0.0;
  return est;
}

PmfEstimate fit_binomial_dak(const CountSample& sample, double h) {
  if (!std::isfinite(h) || h < 0.0 || h > 1.0) {
    throw domain_error("binomial kernel: h must be in [0, 1]");
  }
  PmfEstimate est;
  est.estimator = EstimatorKind::binomial;
  est.bandwidth = h;
  est.x_max = sample.max_value() + 1;
  est.probs.assign(static_cast<std::size_t>(est.x_max) + 1, 0.0);

  const double n = static_cast<double>(sample.n());
  for (const auto& [v, c] : sample.distinct()) {
    const double w = static_cast<double>(c) / n;
    const long long m = v + 1;
    const double p = (static_cast<double>(v) + h) / static_cast<double>(m);
    const std::vector<double> row = binomial_pmf_row(m, p);
    for (long long x = 0; x <= m; ++x) {
      est.probs[static_cast<std::size_t>(x)] +=
          w * row[static_cast<std::size_t>(x)];
    }
  }

  CompensatedSum mean;
  for (long long x = 0; x <= est.x_max; ++x) {
    mean.add(static_cast<double>(x) * est.probs[static_cast<std::size_t>(x)]);
  }
  est.mean = mean.value();
  est.tail_mass = 0.0;
  return est;
}

}  // namespace cmpsmooth
