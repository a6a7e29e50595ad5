#include "erlang_rain/cost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace erlang_rain {

namespace {

const double kSqrt3 = std::sqrt(3.0);

RainModel cell_model(const CellModel& cell, double lambda_s, double support) {
  RainModel m;
  m.pathloss = cell.pathloss;
  m.channel = cell.channel;
  m.quad = cell.quad;
  m.density = SpatialDensity::uniform(lambda_s, support);
  return m;
}

}  // namespace

void CostParams::validate() const {
  if (!(c_s > 0.0) || !std::isfinite(c_s)) throw ValidationError("sensor price must be positive");
  if (!(c_c >= c_s) || !std::isfinite(c_c)) throw ValidationError("cluster-head price must be at least the sensor price");
  if (!(target_d > 0.0) || !std::isfinite(target_d)) throw ValidationError("target density must be positive");
}

double r_max(double lambda_c) {
  if (!(lambda_c > 0.0)) throw DomainError("r_max: cluster-head density must be positive");
  return 4.0 / std::sqrt(lambda_c * 3.0 * kSqrt3);
}

double lambda_c_from_radius(double radius) {
  if (!(radius > 0.0)) throw DomainError("cell radius must be positive");
  return 16.0 / (radius * radius * 3.0 * kSqrt3);
}

double lambda_c_from_spacing(double spacing) {
  if (!(spacing > 0.0)) throw DomainError("grid spacing must be positive");
  return 4.0 / (spacing * spacing * kSqrt3);
}

double cell_sensor_density(double lambda_s, double lambda_c, const CellModel& cell, CellPolicy policy) {
  if (!(lambda_s >= 0.0)) throw DomainError("sensor density must be non-negative");
  if (lambda_s == 0.0) return 0.0;
  const double radius = r_max(lambda_c);
  if (policy == CellPolicy::maxmin) {
    return maxmin_level(radius, cell_model(cell, lambda_s, radius), BoundKind::lower, cell.solver);
  }
  const double r0 = naive_radius(cell.pathloss, cell.channel);
  if (radius > r0) return 0.0;
  const RainModel m = cell_model(cell, lambda_s, std::max(radius, r0));
  return rho(m, Policy::indicator(r0), radius).exact;
}

double required_lambda_c(double lambda_s, const CostParams& cost, const CellModel& cell, CellPolicy policy) {
  cost.validate();
  cell.channel.validate();
  const double lambda_e = cell.channel.lambda_e;
  if (!(lambda_e > 0.0)) throw ValidationError("cost optimization needs a positive emission rate");
  const double top = cost.target_d / lambda_e;
  if (lambda_s == 0.0) return top;
  auto feasible = [&](double lc) {
    return lambda_e * lc + cell_sensor_density(lambda_s, lc, cell, policy) >= cost.target_d;
  };
  if (!feasible(top)) throw InfeasibleError("target density unreachable with cluster-heads alone");
  double lo = std::log(top * 1e-6);
  double hi = std::log(top);
  if (feasible(std::exp(lo))) return std::exp(lo);
  constexpr double kRelTol = 1e-6;
  while (hi - lo > kRelTol) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(std::exp(mid))) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return std::exp(hi);
}

CostCurve cost_sweep(const std::vector<double>& lambda_s_grid, const CostParams& cost, const CellModel& cell,
                     CellPolicy policy) {
  if (lambda_s_grid.empty()) throw ValidationError("cost sweep needs a non-empty sensor density grid");
  cost.validate();
  CostCurve c;
  for (double ls : lambda_s_grid) {
    const double lc = required_lambda_c(ls, cost, cell, policy);
    c.samples.push_back({ls, lc, ls * cost.c_s + lc * cost.c_c});
  }
  for (std::size_t k = 1; k < c.samples.size(); ++k) {
    if (c.samples[k].cost_per_area < c.samples[c.optimum].cost_per_area) c.optimum = k;
  }
  c.baseline = cost.c_c * cost.target_d / cell.channel.lambda_e;
  c.gain = c.baseline / c.samples[c.optimum].cost_per_area;
  return c;
}

double gain_at_ratio(const CostCurve& curve, const CostParams& cost, double ratio, double lambda_e) {
  if (curve.samples.empty()) throw ValidationError("empty cost curve");
  if (!(ratio >= 1.0)) throw ValidationError("price ratio must be at least 1");
  const double c_c = ratio * cost.c_s;
  double best = std::numeric_limits<double>::infinity();
  for (const CostSample& s : curve.samples) best = std::min(best, s.lambda_s * cost.c_s + s.lambda_c * c_c);
  return c_c * cost.target_d / lambda_e / best;
}

std::vector<GainRow> gain_sweep(const std::vector<double>& lambda_s_grid, const std::vector<double>& ratios,
                                const CostParams& cost, const CellModel& cell) {
  const CostCurve maxm = cost_sweep(lambda_s_grid, cost, cell, CellPolicy::maxmin);
  const CostCurve naive = cost_sweep(lambda_s_grid, cost, cell, CellPolicy::naive);
  std::vector<GainRow> rows;
  for (double q : ratios) {
    rows.push_back({q, gain_at_ratio(maxm, cost, q, cell.channel.lambda_e),
                    gain_at_ratio(naive, cost, q, cell.channel.lambda_e)});
  }
  return rows;
}

double certified_edge_density(double lambda_s, double lambda_c, const CellModel& cell) {
  if (lambda_s == 0.0) return 0.0;
  const double radius = r_max(lambda_c);
  const RainModel m = cell_model(cell, lambda_s, radius);
  const MaxMinSolution sol = maxmin_policy(WeightFunction::constant(1.0), radius, m, BoundKind::lower, cell.solver);
  return rho(m, sol.policy, radius).exact;
}

}  // namespace erlang_rain
