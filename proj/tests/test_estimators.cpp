#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "cmpsmooth/errors.hpp"
#include "cmpsmooth/estimators.hpp"
#include "cmpsmooth/numerics.hpp"
#include "test_util.hpp"

using namespace cmpsmooth;

namespace {

std::vector<long long> random_sample(testutil::Stream& rng, int n,
                                     long long hi) {
  std::vector<long long> v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.uniform_int(0, hi);
  return v;
}

double total_mass(const PmfEstimate& e) {
  CompensatedSum s;
  for (double p : e.probs) s.add(p);
  s.add(e.tail_mass);
  return s.value();
}

}  // namespace

TEST_CASE("count sample summaries") {
  const CountSample s({1, 2, 3});
  CHECK(s.n() == 3);
  CHECK(s.mean() == 2.0);
  CHECK(s.variance() == 1.0);
  CHECK(s.min_value() == 1);
  CHECK(s.max_value() == 3);

  const CountSample one({5});
  CHECK(one.mean() == 5.0);
  CHECK(one.variance() == 0.0);

  const CountSample multi({5, 2, 5, 2});
  CHECK(multi.mean() == 3.5);
  CHECK(multi.variance() == 3.0);
  REQUIRE(multi.distinct().size() == 2);
  CHECK(multi.distinct()[0] == std::pair<long long, int>{2, 2});
  CHECK(multi.distinct()[1] == std::pair<long long, int>{5, 2});

  CHECK_THROWS_AS(CountSample({}), domain_error);
  CHECK_THROWS_AS(CountSample({3, -1}), domain_error);
}

TEST_CASE("histogram") {
  const PmfEstimate h = fit_histogram(CountSample({0, 1, 1, 3}));
  CHECK(h.estimator == EstimatorKind::histogram);
  CHECK(h.x_max == 3);
  CHECK(h.probs == std::vector<double>{0.25, 0.5, 0.0, 0.25});
  CHECK(h.tail_mass == 0.0);
  CHECK(h.mean == 1.25);
  CHECK(!h.bandwidth.has_value());
  CHECK(h.prob(7) == 0.0);
  CHECK(h.prob(-2) == 0.0);
}

TEST_CASE("cmp fit blends one kernel per observation") {
  // {0, 2} at h = 1: Poisson kernels, f(0) = (1 + e^-2)/2
  const PmfEstimate e = fit_cmp_dak(CountSample({0, 2}), 1.0);
  CHECK(e.estimator == EstimatorKind::cmp);
  CHECK(e.bandwidth == 1.0);
  CHECK(e.prob(0) ==
        doctest::Approx(0.56766764161830641).epsilon(1e-10));
  CHECK(e.mean == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(e.x_max >= 12);  // max_value + min_margin
  CHECK(std::abs(total_mass(e) - 1.0) <= 1e-10);
}

TEST_CASE("cmp fit at the bandwidth floor is the histogram") {
  const CountSample s({3, 3, 7, 1, 3});
  const PmfEstimate hist = fit_histogram(s);
  for (double h : {0.0, 1e-6, 1e-4}) {
    const PmfEstimate e = fit_cmp_dak(s, h);
    for (long long x = 0; x <= e.x_max; ++x) {
      CHECK(e.prob(x) == hist.prob(x));
    }
    CHECK(e.mean == hist.mean);
  }
}

TEST_CASE("cmp fit is strictly positive above the floor") {
  const PmfEstimate e = fit_cmp_dak(CountSample({2, 9}), 0.01);
  for (long long x = 0; x <= e.x_max; ++x) CHECK(e.prob(x) > 0.0);
}

TEST_CASE("cmp fit preserves the sample mean at every bandwidth") {
  testutil::Stream rng(99);
  for (int i = 0; i < 20; ++i) {
    const CountSample s(random_sample(rng, 3 + int(rng.uniform_int(0, 40)), 45));
    const double h = std::exp(rng.uniform(std::log(1e-4), std::log(20.0)));
    const PmfEstimate e = fit_cmp_dak(s, h);
    CHECK(std::abs(e.mean - s.mean()) <= 1e-8);
    CHECK(std::abs(total_mass(e) - 1.0) <= 1e-10);
    for (double p : e.probs) CHECK(p >= 0.0);
    CHECK(e.x_max >= s.max_value() + 10);
    CHECK(e.tail_mass <= 1.0001e-8);
  }
}

TEST_CASE("cmp fit accepts a fixed support") {
  SupportRule rule;
  rule.fixed_max = 5;
  const PmfEstimate e = fit_cmp_dak(CountSample({0, 2}), 1.0, {}, rule);
  CHECK(e.x_max == 5);
  CHECK(e.tail_mass > 0.0);
  CHECK(std::abs(total_mass(e) - 1.0) <= 1e-12);

  SupportRule bad;
  bad.tail_tol = 0.0;
  CHECK_THROWS_AS(fit_cmp_dak(CountSample({0, 2}), 1.0, {}, bad), domain_error);
  CHECK_THROWS_AS(fit_cmp_dak(CountSample({0, 2}), -0.5), domain_error);
}

TEST_CASE("triangular kernel weights") {
  // arm 1, h 1: exact quarters
  CHECK(triangular_kernel_weights({1, 1.0}) ==
        std::vector<double>{0.25, 0.5, 0.25});

  // arm 2, h 1: proportional to (1, 2, 3, 2, 1)
  const std::vector<double> w = triangular_kernel_weights({2, 1.0});
  for (int d = 0; d < 5; ++d) {
    const double expect[] = {1.0, 2.0, 3.0, 2.0, 1.0};
    CHECK(w[d] == expect[d] / 9.0);
  }

  // h = 0 degenerates to a point mass
  CHECK(triangular_kernel_weights({2, 0.0}) ==
        std::vector<double>{0.0, 0.0, 1.0, 0.0, 0.0});

  CHECK_THROWS_AS(triangular_kernel_weights({-1, 1.0}), domain_error);
  CHECK_THROWS_AS(triangular_kernel_weights({2, -0.5}), domain_error);
}

TEST_CASE("triangular fit spreads and renormalizes") {
  // interior center: no renormalization
  const PmfEstimate e = fit_triangular_dak(CountSample({3}), {1, 1.0});
  CHECK(e.estimator == EstimatorKind::triangular);
  CHECK(e.x_max == 4);
  CHECK(e.prob(2) == 0.25);
  CHECK(e.prob(3) == 0.5);
  CHECK(e.prob(4) == 0.25);
  CHECK(e.tail_mass == 0.0);

  // center at zero: below-zero mass dropped, renormalized to (2/3, 1/3)
  const PmfEstimate z = fit_triangular_dak(CountSample({0}), {1, 1.0});
  CHECK(z.prob(0) == 2.0 / 3.0);
  CHECK(z.prob(1) == 1.0 / 3.0);
  CHECK(std::abs(total_mass(z) - 1.0) <= 1e-12);
}

TEST_CASE("triangular fit at h = 0 reproduces the histogram") {
  testutil::Stream rng(123);
  for (int i = 0; i < 10; ++i) {
    const CountSample s(random_sample(rng, 1 + int(rng.uniform_int(0, 30)), 12));
    const PmfEstimate hist = fit_histogram(s);
    const PmfEstimate e = fit_triangular_dak(s, {2, 0.0});
    CHECK(e.x_max == s.max_value() + 2);
    for (long long x = 0; x <= e.x_max; ++x) CHECK(e.prob(x) == hist.prob(x));
  }
}

TEST_CASE("triangular fit invariants") {
  testutil::Stream rng(321);
  for (int i = 0; i < 15; ++i) {
    const CountSample s(random_sample(rng, 1 + int(rng.uniform_int(0, 30)), 9));
    const double h = rng.uniform(0.0, 4.0);
    const long long arm = rng.uniform_int(1, 4);
    const PmfEstimate e = fit_triangular_dak(s, {arm, h});
    CHECK(std::abs(total_mass(e) - 1.0) <= 1e-10);
    for (double p : e.probs) CHECK(p >= 0.0);
    CHECK(e.prob(s.max_value() + arm + 1) == 0.0);
    CHECK(e.x_max == s.max_value() + arm);
  }
}

TEST_CASE("binomial fit examples") {
  // {0} at h = 0: trials 1, success 0, point mass at 0
  const PmfEstimate z = fit_binomial_dak(CountSample({0}), 0.0);
  CHECK(z.prob(0) == 1.0);
  CHECK(z.x_max == 1);

  // {2} at h = 0: Binomial(3, 2/3) = (1, 6, 12, 8)/27
  const PmfEstimate b = fit_binomial_dak(CountSample({2}), 0.0);
  CHECK(b.prob(0) == doctest::Approx(1.0 / 27.0).epsilon(1e-13));
  CHECK(b.prob(1) == doctest::Approx(6.0 / 27.0).epsilon(1e-13));
  CHECK(b.prob(2) == doctest::Approx(12.0 / 27.0).epsilon(1e-13));
  CHECK(b.prob(3) == doctest::Approx(8.0 / 27.0).epsilon(1e-13));

  // h = 1 makes every kernel a point mass at v + 1
  const PmfEstimate s = fit_binomial_dak(CountSample({1, 4}), 1.0);
  CHECK(s.prob(2) == 0.5);
  CHECK(s.prob(5) == 0.5);

  CHECK_THROWS_AS(fit_binomial_dak(CountSample({1}), -0.1), domain_error);
  CHECK_THROWS_AS(fit_binomial_dak(CountSample({1}), 1.5), domain_error);
}

TEST_CASE("binomial fit shifts the mean by h") {
  testutil::Stream rng(456);
  for (int i = 0; i < 15; ++i) {
    const CountSample s(random_sample(rng, 2 + int(rng.uniform_int(0, 40)), 70));
    const double h = rng.u01();
    const PmfEstimate e = fit_binomial_dak(s, h);
    CHECK(std::abs(e.mean - (s.mean() + h)) <= 1e-10);
    CHECK(std::abs(total_mass(e) - 1.0) <= 1e-10);
    CHECK(e.x_max == s.max_value() + 1);
  }
}
