#include "cmpsmooth/bandwidth.hpp"

#include <algorithm>
#include <cmath>

#include "cmpsmooth/errors.hpp"
#include "cmpsmooth/numerics.hpp"

namespace cmpsmooth {

namespace {

void validate_search(const SearchConfig& cfg) {
  if (!(cfg.h_min > 0.0) || !(cfg.h_max > cfg.h_min) ||
      !std::isfinite(cfg.h_max)) {
    throw domain_error("SearchConfig: need 0 < h_min < h_max < inf");
  }
  if (cfg.prescan_points < 3) {
    throw domain_error("SearchConfig: prescan_points must be >= 3");
  }
  if (!(cfg.rel_tol > 0.0) || !std::isfinite(cfg.rel_tol)) {
    throw domain_error("SearchConfig: rel_tol must be finite and > 0");
  }
  cfg.series.validate();
}

std::vector<double> geometric_grid(const SearchConfig& cfg) {
  std::vector<double> g(static_cast<std::size_t>(cfg.prescan_points));
  const double la = std::log(cfg.h_min);
  const double lb = std::log(cfg.h_max);
  const int last = cfg.prescan_points - 1;
  for (int i = 0; i <= last; ++i) {
    g[static_cast<std::size_t>(i)] =
        std::exp(la + (lb - la) * static_cast<double>(i) / last);
  }
  g.front() = cfg.h_min;  // pin endpoints against exp/log drift
  g.back() = cfg.h_max;
  return g;
}

struct SearchOutcome {
  double h = 0.0;
  double value = 0.0;
  std::vector<std::pair<double, double>> trace;
};

// Minimizes objective over the box: geometric prescan, then golden section
// in log h around the best cell. The returned optimum is the best of every
// evaluation made, ties toward smaller h.
SearchOutcome minimize_over_h(const std::function<double(double)>& objective,
                              const SearchConfig& cfg) {
  validate_search(cfg);
  SearchOutcome out;
  out.value = kPosInf;
  out.h = cfg.h_min;
  bool any = false;
  auto eval = [&](double h) {
    const double v = objective(h);
    if (std::isnan(v)) {
      throw convergence_error("bandwidth objective returned NaN");
    }
    out.trace.emplace_back(h, v);
    if (!any || v < out.value || (v == out.value && h < out.h)) {
      out.value = v;
      out.h = h;
      any = true;
    }
    return v;
  };

  const std::vector<double> grid = geometric_grid(cfg);
  std::vector<double> gv(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) gv[i] = eval(grid[i]);

  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (gv[i] < gv[best]) best = i;  // strict: ties keep the smaller h
  }
  double a = std::log(grid[best == 0 ? 0 : best - 1]);
  double b = std::log(grid[std::min(best + 1, grid.size() - 1)]);

  const double invgold = 0.61803398874989485;
  const double stop = std::log1p(cfg.rel_tol);
  double x1 = b - invgold * (b - a);
  double x2 = a + invgold * (b - a);
  double f1 = eval(std::exp(x1));
  double f2 = eval(std::exp(x2));
  while (b - a > stop) {
    if (f1 <= f2) {  // ties shrink toward the smaller h
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invgold * (b - a);
      f1 = eval(std::exp(x1));
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invgold * (b - a);
      f2 = eval(std::exp(x2));
    }
  }
  return out;
}

long long safe_quantile(const PoissonRef& ref) {
  return ref.lambda == 0.0 ? 0 : ref.quantile(1.0 - 1e-12);
}

double kl_objective_with_refs(const CountSample& sample, double h,
                              const PoissonRef& pois, long long pois_cap,
                              const std::optional<NegBinRef>& nb,
                              long long nb_cap, const SearchConfig& cfg) {
  const PmfEstimate est = fit_cmp_dak(sample, h, cfg.series, cfg.support);
  auto est_pmf = [&](long long x) { return est.prob(x); };
  const double d_pois = kl_divergence(
      est_pmf, [&](long long x) { return pois.pmf(x); },
      std::max(est.x_max, pois_cap));
  if (!nb) return d_pois;
  const double d_nb = kl_divergence(
      est_pmf, [&](long long x) { return nb->pmf(x); },
      std::max(est.x_max, nb_cap));
  return std::max(d_pois, d_nb);
}

double cv_objective_impl(const CountSample& sample, double h,
                         const SearchConfig& cfg) {
  const auto& distinct = sample.distinct();
  const double n = static_cast<double>(sample.n());
  std::vector<CmpKernel> kernels;
  kernels.reserve(distinct.size());
  for (const auto& [v, c] : distinct) {
    kernels.push_back(make_kernel(static_cast<double>(v), h, cfg.series));
  }
  CompensatedSum loglik;
  for (std::size_t j = 0; j < distinct.size(); ++j) {
    const long long vj = distinct[j].first;
    // leave-one-out pmf at vj: drop one kernel centered there, computed
    // without the cancellation of the n*f(vj) - K identity
    CompensatedSum num;
    num.add(static_cast<double>(distinct[j].second - 1) *
            cmp_pmf(kernels[j], vj));
    for (std::size_t u = 0; u < distinct.size(); ++u) {
      if (u == j) continue;
      num.add(static_cast<double>(distinct[u].second) *
              cmp_pmf(kernels[u], vj));
    }
    const double loo = num.value() / (n - 1.0);
    if (!(loo > 0.0)) return kNegInf;
    loglik.add(static_cast<double>(distinct[j].second) * std::log(loo));
  }
  return loglik.value();
}

}  // namespace

const char* bandwidth_method_name(BandwidthMethod m) {
  switch (m) {
    case BandwidthMethod::kl: return "kl";
    case BandwidthMethod::cv: return "cv";
    case BandwidthMethod::fixed: return "fixed";
  }
  return "unknown";
}

double kl_divergence(const std::function<double(long long)>& p,
                     const std::function<double(long long)>& q,
                     long long cap) {
  if (cap < 0) throw domain_error("kl_divergence: cap must be >= 0");
  CompensatedSum s;
  for (long long x = 0; x <= cap; ++x) {
    const double px = p(x);
    if (px < 0.0) throw domain_error("kl_divergence: p(x) must be >= 0");
    if (px == 0.0) continue;  // 0 log 0 = 0
    const double qx = q(x);
    if (qx <= 0.0) return kPosInf;
    s.add(px * std::log(px / qx));
  }
  return s.value();
}

double kl_objective(const CountSample& sample, double h,
                    const SearchConfig& cfg) {
  validate_search(cfg);
  const PoissonRef pois = fit_reference_poisson(sample);
  const std::optional<NegBinRef> nb = fit_reference_nb(sample);
  return kl_objective_with_refs(sample, h, pois, safe_quantile(pois), nb,
                                nb ? nb->quantile(1.0 - 1e-12) : 0, cfg);
}

double cv_objective(const CountSample& sample, double h,
                    const SearchConfig& cfg) {
  validate_search(cfg);
  if (sample.n() < 2) {
    throw domain_error("cv bandwidth selection needs n >= 2");
  }
  return cv_objective_impl(sample, h, cfg);
}

BandwidthResult select_h_kl(const CountSample& sample,
                            const SearchConfig& cfg) {
  validate_search(cfg);
  const PoissonRef pois = fit_reference_poisson(sample);
  const std::optional<NegBinRef> nb = fit_reference_nb(sample);
  const long long pois_cap = safe_quantile(pois);
  const long long nb_cap = nb ? nb->quantile(1.0 - 1e-12) : 0;
  const SearchOutcome got = minimize_over_h(
      [&](double h) {
        return kl_objective_with_refs(sample, h, pois, pois_cap, nb, nb_cap,
                                      cfg);
      },
      cfg);
  BandwidthResult r;
  r.h = got.h;
  r.method = BandwidthMethod::kl;
  r.objective_value = got.value;
  r.trace = got.trace;
  r.reference_fits = ReferenceFits{pois.lambda, nb};
  return r;
}

BandwidthResult select_h_cv(const CountSample& sample,
                            const SearchConfig& cfg) {
  validate_search(cfg);
  if (sample.n() < 2) {
    throw domain_error("cv bandwidth selection needs n >= 2");
  }
  const SearchOutcome got = minimize_over_h(
      [&](double h) { return -cv_objective_impl(sample, h, cfg); }, cfg);
  BandwidthResult r;
  r.h = got.h;
  r.method = BandwidthMethod::cv;
  r.objective_value = -got.value;
  r.trace = got.trace;
  for (auto& [h, v] : r.trace) v = -v;  // store the maximized objective
  r.degenerate = !std::isfinite(got.value);
  return r;
}

BandwidthResult select_h_kl_triangular(const CountSample& sample,
                                       long long arm,
                                       const SearchConfig& cfg) {
  validate_search(cfg);
  const PoissonRef pois = fit_reference_poisson(sample);
  const std::optional<NegBinRef> nb = fit_reference_nb(sample);
  const long long pois_cap = safe_quantile(pois);
  const long long nb_cap = nb ? nb->quantile(1.0 - 1e-12) : 0;

  auto objective = [&](double h) {
    const PmfEstimate est = fit_triangular_dak(sample, {arm, h});
    auto est_pmf = [&](long long x) { return est.prob(x); };
    const double d_pois = kl_divergence(
        est_pmf, [&](long long x) { return pois.pmf(x); },
        std::max(est.x_max, pois_cap));
    if (!nb) return d_pois;
    return std::max(d_pois,
                    kl_divergence(est_pmf,
                                  [&](long long x) { return nb->pmf(x); },
                                  std::max(est.x_max, nb_cap)));
  };

  BandwidthResult r;
  r.method = BandwidthMethod::kl;
  r.reference_fits = ReferenceFits{pois.lambda, nb};
  double best_v = kPosInf;
  double best_h = cfg.h_min;
  bool any = false;
  for (double h : geometric_grid(cfg)) {
    const double v = objective(h);
    if (std::isnan(v)) {
      throw convergence_error("bandwidth objective returned NaN");
    }
    r.trace.emplace_back(h, v);
    if (!any || v < best_v) {
      best_v = v;
      best_h = h;
      any = true;
    }
  }
  r.h = best_h;
  r.objective_value = best_v;
  return r;
}

}  // namespace cmpsmooth
