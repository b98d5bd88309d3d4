#pragma once

#include <optional>
#include <vector>

#include "cmpsmooth/cmp.hpp"
#include "cmpsmooth/sample.hpp"

namespace cmpsmooth {

enum class EstimatorKind { histogram, cmp, triangular, binomial };

const char* estimator_name(EstimatorKind k);

// A fitted pmf on {0, ..., x_max}. tail_mass is whatever the estimator
// places beyond x_max (zero for hard finite-support estimators), so
// sum(probs) + tail_mass = 1 up to roundoff. mean is the exact first moment
// of the estimator, free of support truncation: for the cmp fit it is the
// weight-average of kernel means, for the others the finite sum.
struct PmfEstimate {
  std::vector<double> probs;
  long long x_max = 0;
  double tail_mass = 0.0;
  EstimatorKind estimator = EstimatorKind::histogram;
  std::optional<double> bandwidth;
  double mean = 0.0;

  double prob(long long x) const {
    if (x < 0 || x > x_max) return 0.0;
    return probs[static_cast<std::size_t>(x)];
  }
};

// Support policy for estimators whose kernels have unbounded support:
// either a user-fixed x_max, or the smallest x with cumulative mass at
// least 1 - tail_tol, never below max_value + min_margin.
struct SupportRule {
  std::optional<long long> fixed_max;
  double tail_tol = 1e-8;
  long long min_margin = 10;
};

PmfEstimate fit_histogram(const CountSample& sample);

// Smooth with one mean-preserving CMP kernel per observation, each centered
// at the observed value: f(x) = (1/n) sum_i K(x; X_i, 1/h). The estimate
// mean equals the sample mean for every bandwidth.
PmfEstimate fit_cmp_dak(const CountSample& sample, double h,
                        const SeriesConfig& cfg = {},
                        const SupportRule& rule = {});

// Symmetric triangular kernel on offsets -arm..arm with weights
// proportional to (arm+1)^h - |d|^h, using the 0^h = 0 convention at h = 0
// (point mass). Mass falling below zero is dropped and the whole estimate
// renormalized.
struct TriangularKernelSpec {
  long long arm = 2;
  double h = 1.0;
};

std::vector<double> triangular_kernel_weights(const TriangularKernelSpec& spec);

PmfEstimate fit_triangular_dak(const CountSample& sample,
                               const TriangularKernelSpec& spec);

// First-order binomial kernel: trials v+1, success probability (v+h)/(v+1),
// h in [0, 1]; kernel mean v + h, so the estimate mean is X-bar + h.
PmfEstimate fit_binomial_dak(const CountSample& sample, double h);

}  // namespace cmpsmooth
