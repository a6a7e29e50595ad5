#include "erlang_rain/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace erlang_rain {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kGolden = 0.5 * (std::sqrt(5.0) - 1.0);

const RadialProfile& radial_profile(const SpatialDensity& density, const char* who) {
  if (!density.is_radial()) {
    throw ValidationError(std::string(who) + " requires a radial sensor density");
  }
  return density.profile();
}

/// Maximizes f on [a, b] by golden-section search; returns the abscissa.
template <class F>
double golden_max(F&& f, double a, double b, double tol) {
  double c = b - kGolden * (b - a);
  double d = a + kGolden * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kGolden * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kGolden * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

/// Edges of the pieces of (0, radius] on which density and weights are both constant.
std::vector<double> smooth_pieces(double radius, const RadialProfile& prof, const WeightFunction& w) {
  const std::vector<double> wb = w.breakpoints();
  return merge_breakpoints(0.0, radius, {prof.edges(), wb});
}

/// Samples f at a uniform grid of (0, radius] and at both sides of every
/// interior piece edge, sorted by radius.
template <class F>
std::vector<std::pair<double, double>> scan(F&& f, double radius, const std::vector<double>& edges, int n) {
  std::vector<std::pair<double, double>> out;
  for (int k = 0; k <= n; ++k) {
    const double r = radius * k / n;
    out.emplace_back(r, f(r));
  }
  for (std::size_t i = 1; i + 1 < edges.size(); ++i) {
    const double e = edges[i];
    out.emplace_back(e, f(e));
    const double right = std::nextafter(e, kInf);
    out.emplace_back(right, f(right));
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  return out;
}

struct MaxMinConstants {
  double m = kInf;
  double i = kInf;
  double argmax = 0.0;
};

MaxMinConstants maxmin_constants(const WeightFunction& w, double radius, const RainModel& model, BoundKind kind,
                                 const SolverOptions& opts) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ValidationError("domain radius must be positive");
  const RadialProfile& prof = radial_profile(model.density, "max-min policy");
  MaxMinConstants c;
  if (prof.outer_radius() < radius) return c;
  double inner = 0.0;
  for (std::size_t k = 0; k < prof.edges().size() && inner < radius; ++k) {
    if (!(prof.values()[k] > 0.0)) return c;
    inner = prof.edges()[k];
  }

  auto inv_score = [&](double r) {
    const double lam = prof.at(r);
    const double p = p_rec_bound(model, r, kind);
    if (!(lam > 0.0) || !(p > 0.0)) return kInf;
    return w(r) / (lam * p);
  };
  const std::vector<double> edges = smooth_pieces(radius, prof, w);
  const auto samples = scan(inv_score, radius, edges, opts.scan_points);
  std::size_t best = 0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (samples[k].second >= samples[best].second) best = k;  // ties go to the larger radius
  }
  c.m = samples[best].second;
  c.argmax = samples[best].first;
  if (!std::isfinite(c.m)) return c;

  // Refine inside the smooth piece holding the coarse argmax.
  const auto piece = std::upper_bound(edges.begin(), edges.end(), c.argmax);
  const double lo = piece == edges.begin() ? 0.0 : *(piece - 1);
  const double hi = piece == edges.end() ? radius : *piece;
  const double step = radius / opts.scan_points;
  const double a = std::max(lo, c.argmax - step);
  const double b = std::min(hi, c.argmax + step);
  if (b > a) {
    const double mid_lam = prof.at(0.5 * (a + b));
    const double mid_w = w(0.5 * (a + b));
    auto g = [&](double r) {
      const double p = p_rec_bound(model, r, kind);
      return p > 0.0 ? mid_w / (mid_lam * p) : kInf;
    };
    const double r = golden_max(g, a, b, opts.radius_rel_tol * radius);
    const double v = g(r);
    if (v > c.m) {
      c.m = v;
      c.argmax = r;
    }
  }

  auto integrand = [&](double r) {
    if (r == 0.0) return 0.0;
    const double p = p_rec_bound(model, r, kind);
    return w(r) / p * r;
  };
  try {
    c.i = 2.0 * std::numbers::pi * integrate_pieces(integrand, edges, model.quad);
  } catch (const NumericError&) {
    c.i = kInf;
  }
  return c;
}

double level_from(const MaxMinConstants& c, const ChannelParams& ch) {
  if (!std::isfinite(c.m) || !std::isfinite(c.i) || ch.lambda_e == 0.0) return 0.0;
  return 1.0 / (ch.b * c.i + c.m / ch.lambda_e);
}

/// Appends nodes of f on [a, b] (a already present) until linear interpolation
/// reproduces every midpoint within tol.
template <class F>
void refine_table(F& f, double a, double fa, double b, double fb, double tol, int depth, std::vector<double>& x,
                  std::vector<double>& y) {
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  if (depth <= 0 || std::abs(0.5 * (fa + fb) - fm) <= tol * std::abs(fm) || m <= a || m >= b) {
    x.push_back(b);
    y.push_back(fb);
    return;
  }
  refine_table(f, a, fa, m, fm, tol, depth - 1, x, y);
  refine_table(f, m, fm, b, fb, tol, depth - 1, x, y);
}

template <class F>
double bisect_largest_feasible(F&& feasible, double lo, double hi, double rel_tol) {
  while (hi - lo > rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

RainModel restricted(const RainModel& model, double radius) {
  RainModel m = model;
  m.density = model.density.truncated(radius);
  return m;
}

}  // namespace

const char* to_string(BoundKind kind) { return kind == BoundKind::lower ? "lower" : "upper"; }

BoundKind bound_kind_from_string(const std::string& s) {
  if (s == "lower") return BoundKind::lower;
  if (s == "upper") return BoundKind::upper;
  throw ValidationError("bound kind must be 'lower' or 'upper', got '" + s + "'");
}

double p_rec_bound(const RainModel& model, double r, BoundKind kind) {
  if (r == 0.0) return 1.0;
  const ReceptionBounds b = p_rec_bounds(model, r);
  return kind == BoundKind::lower ? b.lower : b.upper;
}

double naive_radius(const PathLoss& pl, const ChannelParams& ch) {
  ch.validate();
  if (ch.noise_w == 0.0) throw DomainError("naive radius undefined");
  return pl.inverse(ch.gamma * ch.noise_w / ch.p_bar);
}

Policy naive_policy(const PathLoss& pl, const ChannelParams& ch) {
  return Policy::indicator(naive_radius(pl, ch));
}

// --- max-min ---------------------------------------------------------------

double MaxMinSolution::rho_achieved(double r) const {
  return r <= domain_radius ? weights(r) * level : 0.0;
}

MaxMinSolution maxmin_policy(const WeightFunction& weights, double domain_radius, const RainModel& model,
                             BoundKind kind, const SolverOptions& opts) {
  model.channel.validate();
  const MaxMinConstants c = maxmin_constants(weights, domain_radius, model, kind, opts);
  if (!std::isfinite(c.m)) throw InfeasibleError("max-min policy does not exist");

  const RadialProfile& prof = model.density.profile();
  const std::vector<double> edges = smooth_pieces(domain_radius, prof, weights);
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    const double a = edges[k];
    const double b = edges[k + 1];
    const double lam = prof.at(0.5 * (a + b));
    const double wv = weights(0.5 * (a + b));
    auto d = [&](double r) { return std::min(1.0, wv / (c.m * lam * p_rec_bound(model, r, kind))); };
    std::vector<double> grid;
    const int n = std::max(8, static_cast<int>(std::ceil(256.0 * (b - a) / domain_radius)));
    for (int j = 0; j <= n; ++j) grid.push_back(j == n ? b : a + (b - a) * j / n);
    if (c.argmax > a && c.argmax < b) grid.push_back(c.argmax);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    double prev = d(grid.front());
    xs.push_back(grid.front());
    ys.push_back(prev);
    for (std::size_t j = 1; j < grid.size(); ++j) {
      const double next = d(grid[j]);
      refine_table(d, grid[j - 1], prev, grid[j], next, opts.table_rel_tol, 40, xs, ys);
      prev = next;
    }
  }

  MaxMinSolution s;
  s.policy = Policy::tabulated(std::move(xs), std::move(ys));
  s.m_const = c.m;
  s.i_const = c.i;
  s.level = level_from(c, model.channel);
  s.argmax_radius = c.argmax;
  s.domain_radius = domain_radius;
  s.bound_kind = kind;
  s.weights = weights;
  return s;
}

double maxmin_level(double radius, const RainModel& model, BoundKind kind, const SolverOptions& opts) {
  const RainModel m = restricted(model, radius);
  return level_from(maxmin_constants(WeightFunction::constant(1.0), radius, m, kind, opts), m.channel);
}

double maxmin_max_radius(double target, const RainModel& model, BoundKind kind, const SolverOptions& opts) {
  if (!(target > 0.0)) throw ValidationError("target density must be positive");
  model.channel.validate();
  const double lo = opts.r_min;
  const double hi = model.density.support_radius();
  if (!(hi > lo) || maxmin_level(lo, model, kind, opts) < target) {
    throw InfeasibleError("target density unreachable at any radius");
  }
  if (maxmin_level(hi, model, kind, opts) >= target) return hi;
  return bisect_largest_feasible([&](double r) { return maxmin_level(r, model, kind, opts) >= target; }, lo, hi,
                                 opts.radius_rel_tol);
}

// --- water-filling ---------------------------------------------------------

Policy WaterfillSolution::policy() const {
  if (region.empty()) return Policy::admit_none();
  if (region.size() == 1 && region.front().first == 0.0) return Policy::indicator(region.front().second);
  return Policy::annuli(region);
}

double waterfill_objective(const std::vector<std::pair<double, double>>& region, const WeightFunction& weights,
                           const RainModel& model, BoundKind kind) {
  const ChannelParams& ch = model.channel;
  const RadialProfile& prof = radial_profile(model.density, "water-filling");
  auto f = [&](double r) {
    if (r == 0.0) return 0.0;
    return prof.at(r) * p_rec_bound(model, r, kind) / weights(r) * r;
  };
  const std::vector<double> wb = weights.breakpoints();
  double num = 0.0;
  double mass = 0.0;
  for (const auto& [lo, hi] : region) {
    const std::vector<double> edges = merge_breakpoints(lo, hi, {prof.edges(), wb});
    num += 2.0 * std::numbers::pi * integrate_pieces(f, edges, model.quad);
    mass += model.density.annulus_mass(lo, hi);
  }
  return ch.lambda_e * num / (1.0 + ch.lambda_e * ch.b * mass);
}

WaterfillSolution waterfill_policy(const WeightFunction& weights, double domain_radius, const RainModel& model,
                                   BoundKind kind, const SolverOptions& opts) {
  model.channel.validate();
  if (!(domain_radius > 0.0) || !std::isfinite(domain_radius)) {
    throw ValidationError("domain radius must be positive");
  }
  const RadialProfile& prof = radial_profile(model.density, "water-filling");
  // Admitting x adds lambda_s p / D to the numerator of U and lambda_e B lambda_s
  // to its denominator, so the optimal region is a level set of p / D; sensor-free
  // radii contribute nothing and are never admitted.
  auto ratio = [&](double r) {
    return prof.at(r) > 0.0 ? p_rec_bound(model, r, kind) / weights(r) : -kInf;
  };
  const std::vector<double> edges = smooth_pieces(domain_radius, prof, weights);
  const auto samples = scan(ratio, domain_radius, edges, opts.scan_points);

  WaterfillSolution s;
  s.bound_kind = kind;
  s.monotone = true;
  for (std::size_t k = 1; k < samples.size(); ++k) {
    if (samples[k].second > samples[k - 1].second * (1.0 + 1e-12)) {
      s.monotone = false;
      break;
    }
  }

  if (s.monotone) {
    // The level sets are disks B(0, R): maximize U over R.
    auto u = [&](double r) {
      if (r <= 0.0) return 0.0;
      return waterfill_objective({{0.0, r}}, weights, model, kind);
    };
    constexpr int kCoarse = 64;
    int best = 0;
    double best_u = 0.0;
    for (int k = 1; k <= kCoarse; ++k) {
      const double v = u(domain_radius * k / kCoarse);
      if (v >= best_u) {
        best_u = v;
        best = k;
      }
    }
    double r_star = domain_radius * best / kCoarse;
    if (best > 0) {
      const double a = domain_radius * (best - 1) / kCoarse;
      const double b = domain_radius * std::min(best + 1, kCoarse) / kCoarse;
      const double r = golden_max(u, a, b, opts.radius_rel_tol * domain_radius);
      const double v = u(r);
      if (v > best_u) {
        best_u = v;
        r_star = r;
      }
    }
    if (r_star > 0.0) s.region = {{0.0, r_star}};
    s.theta_star = r_star > 0.0 ? ratio(r_star) : ratio(0.0);
    s.u_star = best_u;
    return s;
  }

  // General case: sweep thresholds over quantiles of p / D on a cell grid.
  const ChannelParams& ch = model.channel;
  std::vector<double> cell_edges;
  for (int k = 0; k <= opts.waterfill_cells; ++k) cell_edges.push_back(domain_radius * k / opts.waterfill_cells);
  cell_edges.insert(cell_edges.end(), edges.begin(), edges.end());
  std::sort(cell_edges.begin(), cell_edges.end());
  cell_edges.erase(std::unique(cell_edges.begin(), cell_edges.end()), cell_edges.end());
  const std::size_t n = cell_edges.size() - 1;
  std::vector<double> cell_ratio(n), cell_num(n), cell_mass(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double a = cell_edges[k];
    const double b = cell_edges[k + 1];
    const double m = 0.5 * (a + b);
    const double ai = std::nextafter(a, b);
    const double bi = std::nextafter(b, a);
    auto f = [&](double r) { return prof.at(r) * p_rec_bound(model, r, kind) / weights(r) * r; };
    cell_ratio[k] = ratio(m);
    cell_num[k] = 2.0 * std::numbers::pi * (b - a) / 6.0 * (f(ai) + 4.0 * f(m) + f(bi));
    cell_mass[k] = model.density.annulus_mass(a, b);
  }
  std::vector<double> sorted;
  for (double v : cell_ratio) {
    if (std::isfinite(v)) sorted.push_back(v);
  }
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> thresholds{kInf};
  if (!sorted.empty()) {
    thresholds.push_back(sorted.front() * 0.5);
    for (int q = 0; q < opts.waterfill_quantiles; ++q) {
      thresholds.push_back(sorted[static_cast<std::size_t>(q) * (sorted.size() - 1) / (opts.waterfill_quantiles - 1)]);
    }
  }
  double best_u = 0.0;
  double best_theta = kInf;
  for (double th : thresholds) {
    double num = 0.0;
    double mass = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (cell_ratio[k] > th) {
        num += cell_num[k];
        mass += cell_mass[k];
      }
    }
    const double v = ch.lambda_e * num / (1.0 + ch.lambda_e * ch.b * mass);
    if (v > best_u) {
      best_u = v;
      best_theta = th;
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (!(cell_ratio[k] > best_theta)) continue;
    if (!s.region.empty() && s.region.back().second == cell_edges[k]) {
      s.region.back().second = cell_edges[k + 1];
    } else {
      s.region.emplace_back(cell_edges[k], cell_edges[k + 1]);
    }
  }
  s.theta_star = best_theta;
  s.u_star = waterfill_objective(s.region, weights, model, kind);
  return s;
}

// --- coverage-optimal disk -------------------------------------------------

double cod_edge_density(double radius, const RainModel& model) {
  const RainModel m = restricted(model, radius);
  return rho(m, Policy::indicator(radius), radius).exact;
}

CodSolution cod_policy(double target, const RainModel& model, const SolverOptions& opts) {
  if (!(target > 0.0)) throw ValidationError("target density must be positive");
  model.channel.validate();
  const double lo = opts.r_min;
  const double hi = model.density.support_radius();
  if (!(hi > lo) || cod_edge_density(lo, model) < target) {
    throw InfeasibleError("target density unreachable at any radius");
  }
  double r = hi;
  if (cod_edge_density(hi, model) < target) {
    r = bisect_largest_feasible([&](double x) { return cod_edge_density(x, model) >= target; }, lo, hi,
                                opts.radius_rel_tol);
  }
  return {Policy::indicator(r), r};
}

// --- throughput ------------------------------------------------------------

Throughput total_throughput(const Policy& policy, const WeightFunction& weights, double domain_radius,
                            const RainModel& model) {
  model.channel.validate();
  const ChannelParams& ch = model.channel;
  const double lambda = lambda_admissible(model, policy);
  const double pf = p_free(lambda, ch.b);
  const SpatialDensity inside = model.density.truncated(domain_radius);
  std::vector<double> breaks = policy.breakpoints();
  const std::vector<double> wb = weights.breakpoints();
  breaks.insert(breaks.end(), wb.begin(), wb.end());
  std::sort(breaks.begin(), breaks.end());

  auto base = [&](double r) { return ch.lambda_e * policy(r) * pf / weights(r); };
  Throughput t;
  t.lower = radial_integral(
      [&](double r) {
        const double v = base(r);
        return v == 0.0 ? 0.0 : v * p_rec_bound(model, r, BoundKind::lower);
      },
      inside, model.quad, breaks);
  t.upper = radial_integral(
      [&](double r) {
        const double v = base(r);
        return v == 0.0 ? 0.0 : v * p_rec_bound(model, r, BoundKind::upper);
      },
      inside, model.quad, breaks);
  t.exact = radial_integral(
      [&](double r) {
        const double v = base(r);
        if (v == 0.0) return 0.0;
        return v * (r == 0.0 ? 1.0 : detail::p_rec_given_lambda(model, policy, r, lambda));
      },
      inside, model.quad, breaks);
  return t;
}

}  // namespace erlang_rain
