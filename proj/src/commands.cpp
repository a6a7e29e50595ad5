#include "erlang_rain/commands.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace erlang_rain {

namespace {

RainModel restricted(RainModel m, double radius) {
  m.density = m.density.truncated(radius);
  return m;
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

Comparison compare(std::string name, double sim, double se, double analytic) {
  Comparison c{std::move(name), sim, se, analytic, 0.0, true};
  if (se > 0.0) {
    c.z = (sim - analytic) / se;
  } else {
    c.z = sim == analytic ? 0.0 : std::numeric_limits<double>::infinity();
  }
  c.passed = std::abs(c.z) <= 3.0;
  return c;
}

// Mean analytic p_rec over the annulus (lo, hi], weighted by where admissible
// packets are emitted: r lambda_s(r) d(r) for a radial density, the point
// weights times d for an atomic one.
double annulus_p_rec(const RainModel& m, const Policy& pol, double lambda, double lo, double hi) {
  auto p = [&](double r) { return detail::p_rec_given_lambda(m, pol, r, lambda); };
  double num = 0.0;
  double den = 0.0;
  if (m.density.is_atomic()) {
    for (const AtomicPoint& pt : m.density.points()) {
      const double r = pt.radius();
      if (!(r > lo && r <= hi)) continue;
      const double w = pt.weight * pol(r);
      if (w == 0.0) continue;
      num += w * p(r);
      den += w;
    }
    return den > 0.0 ? num / den : 0.0;
  }
  const std::vector<double> pb = pol.breakpoints();
  const std::vector<double> db = m.density.breakpoints();
  const std::vector<double> edges = merge_breakpoints(lo, hi, {pb, db});
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double a = edges[i];
    const double b = edges[i + 1];
    const double mid = 0.5 * (a + b);
    const double w = m.density.intensity_at(mid) * pol(mid);
    if (w == 0.0) continue;
    num += w * integrate_gauss64([&](double r) { return r * p(r); }, a, b);
    den += w * 0.5 * (b * b - a * a);
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace

void write_csv(std::ostream& os, const Scenario& s, const CsvTable& table) {
  os << "# manifest " << scenario_manifest_json(s) << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i) os << (i ? "," : "") << table.columns[i];
  os << '\n';
  char buf[32];
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", row[i]);
      os << (i ? "," : "") << buf;
    }
    os << '\n';
  }
}

ResolvedPolicy resolve_policy(const Scenario& s) {
  ResolvedPolicy out;
  out.model = s.model();
  const PolicySpec& p = s.policy;
  if (p.kind == "indicator") {
    out.policy = Policy::indicator(p.radius);
  } else if (p.kind == "constant") {
    out.policy = Policy::constant(p.value);
  } else if (p.kind == "annuli") {
    out.policy = Policy::annuli(p.intervals);
  } else if (p.kind == "tabulated") {
    out.policy = Policy::tabulated(p.radii, p.values);
  } else if (p.kind == "naive") {
    out.radius = naive_radius(out.model.pathloss, out.model.channel);
    out.radius_name = "R_0";
    out.policy = Policy::indicator(out.radius);
  } else if (p.kind == "cod") {
    const CodSolution c = cod_policy(p.target, out.model, s.solver());
    out.radius = c.radius;
    out.radius_name = "R_COD";
    out.policy = c.policy;
    out.model = restricted(out.model, c.radius);
  } else if (p.kind == "maxmin") {
    out.radius = maxmin_max_radius(p.target, out.model, s.bound(), s.solver());
    out.radius_name = "R_maxm";
    out.model = restricted(out.model, out.radius);
    out.policy = maxmin_policy(s.weights.build(), out.radius, out.model, s.bound(), s.solver()).policy;
  } else if (p.kind == "waterfill") {
    const WaterfillSolution w = waterfill_policy(s.weights.build(), out.model.density.support_radius(), out.model,
                                                 s.bound(), s.solver());
    out.radius = w.outer_radius();
    out.radius_name = "R*";
    out.policy = w.policy();
  } else {
    throw ValidationError("unknown policy kind '" + p.kind + "'");
  }
  return out;
}

CsvTable cmd_prec(const Scenario& s) {
  const ResolvedPolicy rp = resolve_policy(s);
  const ReceptionCurve c = reception_curve(rp.model, rp.policy, s.radius_grid());
  CsvTable t{{"r", "p_rec", "p_rec_lower", "p_rec_upper"}, {}};
  for (std::size_t i = 0; i < c.radii.size(); ++i)
    t.rows.push_back({c.radii[i], c.p_rec[i], c.p_rec_lower[i], c.p_rec_upper[i]});
  return t;
}

PolicyOutput cmd_policy(const Scenario& s, const std::string& kind) {
  if (kind != "naive" && kind != "maxmin" && kind != "waterfill" && kind != "cod")
    throw ValidationError("policy kind must be naive, maxmin, waterfill or cod");
  Scenario sc = s;
  sc.policy.kind = kind;
  PolicyOutput out;
  out.resolved = resolve_policy(sc);
  const std::vector<double> grid = sc.radius_grid();
  out.policy.columns = {"r", "d"};
  for (double r : grid) out.policy.rows.push_back({r, out.resolved.policy(r)});
  const ReceptionCurve c = reception_curve(out.resolved.model, out.resolved.policy, grid);
  out.profile.columns = {"r", "rho", "rho_lower", "rho_upper"};
  for (std::size_t i = 0; i < grid.size(); ++i) out.profile.rows.push_back({grid[i], c.rho[i], c.rho_lower[i], c.rho_upper[i]});
  out.summary = kind + ": " + out.resolved.radius_name + " = " + fmt("%.10g", out.resolved.radius) + " m";
  if (kind == "maxmin" || kind == "waterfill") out.summary += std::string(" (") + to_string(sc.bound()) + " bound)";
  if (kind == "maxmin" || kind == "cod") out.summary += " for target " + fmt("%g", sc.policy.target);
  return out;
}

CostOutput cmd_cost(const Scenario& s) {
  CellModel cell;
  cell.pathloss = s.pathloss();
  cell.channel = s.channel;
  cell.quad.rel_tol = s.rel_tol;
  cell.solver = s.solver();
  const CostParams params = s.cost.params();
  const CostCurve maxm = cost_sweep(s.cost.lambda_s_grid, params, cell, CellPolicy::maxmin);
  const CostCurve naive = cost_sweep(s.cost.lambda_s_grid, params, cell, CellPolicy::naive);
  CostOutput out;
  out.sweep.columns = {"lambda_s", "lambda_c", "cost"};
  for (const CostSample& c : maxm.samples) out.sweep.rows.push_back({c.lambda_s, c.lambda_c, c.cost_per_area});
  out.gains.columns = {"ratio", "gain", "gain_naive"};
  for (double q : s.cost.ratios) {
    out.gains.rows.push_back({q, gain_at_ratio(maxm, params, q, s.channel.lambda_e),
                              gain_at_ratio(naive, params, q, s.channel.lambda_e)});
  }
  return out;
}

ValidationReport cmd_validate(const Scenario& s, int replications, bool self_test) {
  if (replications < 1) throw ValidationError("replications must be at least 1");
  ValidationReport rep;
  const ResolvedPolicy rp = resolve_policy(s);
  const RainModel& model = rp.model;
  const double lambda = lambda_admissible(model, rp.policy);
  if (!(lambda > 0.0)) return rep;  // no admissible traffic: nothing to compare

  const double support = model.density.support_radius();
  SimConfig cfg;
  cfg.duration = s.sim.duration > 0.0 ? s.sim.duration : static_cast<double>(s.sim.packets) / lambda;
  cfg.warmup = s.sim.warmup;
  cfg.domain_radius = s.sim.domain_radius;
  cfg.annulus_bins = static_cast<int>(s.sim.annulus_bins);
  cfg.batches = static_cast<int>(s.sim.batches);
  cfg.rho_radius = s.sim.rho_radius > 0.0 ? s.sim.rho_radius : std::min(rp.policy.reach(), support);

  const AnnulusGrid grid = AnnulusGrid::build(cfg.annulus_bins, cfg.rho_radius, model.density, model.channel.lambda_e);
  std::vector<std::size_t> acc(grid.size(), 0), succ(grid.size(), 0);
  std::vector<PacketEvent> accepted;
  std::vector<double> gaps;
  double pf_sum = 0.0, pf_var = 0.0, pi_sum = 0.0, pi_var = 0.0;
  for (int i = 0; i < replications; ++i) {
    cfg.seed = s.sim.seed + static_cast<std::uint64_t>(i);
    SimRun run = simulate(cfg, model, rp.policy);
    const SimResult& r = run.result;
    rep.packets += r.packets;
    pf_sum += r.p_free_hat.value;
    pf_var += r.p_free_hat.se * r.p_free_hat.se;
    pi_sum += r.pi_hat.value;
    pi_var += r.pi_hat.se * r.pi_hat.se;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      acc[k] += r.rho_hat[k].accepted;
      succ[k] += r.rho_hat[k].successes;
    }
    accepted.insert(accepted.end(), run.accepted.begin(), run.accepted.end());
    gaps.insert(gaps.end(), r.idle_gap_samples.begin(), r.idle_gap_samples.end());
  }
  const double n = replications;

  RainModel analytic = model;
  if (self_test) analytic.channel.gamma *= 2.0;
  const double pf = p_free(lambda, model.channel.b);
  rep.comparisons.push_back(compare("p_free", pf_sum / n, std::sqrt(pf_var) / n, pf));

  const std::vector<double> breaks = rp.policy.breakpoints();
  const double mass = radial_integral(
      [&](double r) {
        const double d = rp.policy(r);
        return d == 0.0 ? 0.0 : d * detail::p_rec_given_lambda(analytic, rp.policy, r, lambda);
      },
      model.density, model.quad, breaks);
  rep.comparisons.push_back(compare("pi", pi_sum / n, std::sqrt(pi_var) / n, pf * model.channel.lambda_e * mass / lambda));

  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!grid.present[k] || acc[k] < 200) continue;
    const double lo = grid.edges[k];
    const double hi = grid.edges[k + 1];
    const double p = static_cast<double>(succ[k]) / static_cast<double>(acc[k]);
    rep.comparisons.push_back(compare("p_rec(" + fmt("%g", lo) + "," + fmt("%g", hi) + "]", p,
                                      std::sqrt(p * (1.0 - p) / static_cast<double>(acc[k])),
                                      annulus_p_rec(analytic, rp.policy, lambda, lo, hi)));
  }

  if (accepted.size() >= 1000) {
    const double xi_ref = model.channel.gamma_at(model.pathloss, cfg.rho_radius);
    for (double f : {0.1, 1.0, 10.0}) {
      const double xi = f * xi_ref;
      const Estimate e = estimate_conditional_laplace(accepted, xi);
      const double exact = laplace_L1(analytic, rp.policy, xi) * laplace_L2(analytic, rp.policy, xi);
      rep.comparisons.push_back(compare("laplace(xi=" + fmt("%.4g", xi) + ")", e.value, e.se, exact));
    }
  }

  if (!gaps.empty()) {
    rep.idle_gaps = idle_gap_test(gaps, lambda);
    rep.idle_gaps_checked = true;
    if (!rep.idle_gaps.passed) rep.failing.push_back("idle_gap");
  }
  for (const Comparison& c : rep.comparisons)
    if (!c.passed) rep.failing.push_back(c.name);
  rep.passed = rep.failing.empty();
  return rep;
}

void write_report(std::ostream& os, const ValidationReport& r) {
  char buf[256];
  os << "packets simulated: " << r.packets << '\n';
  for (const Comparison& c : r.comparisons) {
    std::snprintf(buf, sizeof buf, "%s %-24s sim=%.6g se=%.3g analytic=%.6g z=%+.2f\n", c.passed ? "PASS" : "FAIL",
                  c.name.c_str(), c.simulated, c.se, c.analytic, c.z);
    os << buf;
  }
  if (r.idle_gaps_checked) {
    std::snprintf(buf, sizeof buf, "%s %-24s D=%.4g critical=%.4g n=%zu\n", r.idle_gaps.passed ? "PASS" : "FAIL",
                  "idle_gap", r.idle_gaps.statistic, r.idle_gaps.critical, r.idle_gaps.n);
    os << buf;
  }
  if (r.comparisons.empty() && !r.idle_gaps_checked) os << "no admissible traffic: nothing to compare\n";
  if (r.passed) {
    os << "validation passed\n";
  } else {
    os << "validation failed:";
    for (const std::string& f : r.failing) os << ' ' << f;
    os << '\n';
  }
}

}  // namespace erlang_rain
