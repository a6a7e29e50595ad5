#pragma once

// Admission policies built from the policy-independent reception bounds:
// naive (noise-limited disk), weighted max-min fair, water-filling
// throughput-optimal and the coverage-optimal deterministic disk, plus the
// radius solvers that size them against a target information density.

#include <utility>
#include <vector>

#include "erlang_rain/loss_model.hpp"

namespace erlang_rain {

enum class BoundKind { lower, upper };

const char* to_string(BoundKind kind);
BoundKind bound_kind_from_string(const std::string& s);

struct SolverOptions {
  double r_min = 0.1;              ///< smallest radius a solver considers [m]
  double radius_rel_tol = 1e-9;    ///< bisection / golden-section tolerance on radii
  int scan_points = 512;           ///< coarse scan guarding argmax searches
  double table_rel_tol = 1e-8;     ///< interpolation error allowed in tabulated policies
  int waterfill_cells = 4096;      ///< cells for non-monotone water-filling
  int waterfill_quantiles = 1024;  ///< thresholds tried for non-monotone water-filling
};

/// Reception bound at distance r; r = 0 gives the limit value 1.
double p_rec_bound(const RainModel& model, double r, BoundKind kind);

/// R0 = (kappa p_bar / (gamma W))^(1/eta): the disk where the SNR alone clears gamma.
double naive_radius(const PathLoss& pl, const ChannelParams& ch);
Policy naive_policy(const PathLoss& pl, const ChannelParams& ch);

struct MaxMinSolution {
  Policy policy;
  double m_const = 0.0;        ///< max over the domain of D / (lambda_s p_bound)
  double i_const = 0.0;        ///< integral over the domain of D / p_bound
  double level = 0.0;          ///< 1 / (B I + M / lambda_e)
  double argmax_radius = 0.0;  ///< where the policy reaches 1
  double domain_radius = 0.0;
  BoundKind bound_kind = BoundKind::lower;
  WeightFunction weights;

  /// D(r) / (B I + M / lambda_e) inside the domain, 0 outside.
  double rho_achieved(double r) const;
};

/// Max-min fair policy on B(0, domain_radius) for the model's density as given.
/// Throws InfeasibleError("max-min policy does not exist") when lambda_s
/// vanishes somewhere on the domain.
MaxMinSolution maxmin_policy(const WeightFunction& weights, double domain_radius, const RainModel& model,
                             BoundKind kind, const SolverOptions& opts = {});

/// Flat level 1 / (B I + M / lambda_e) for unit weights on B(0, radius), with
/// the sensors restricted to that disk. Zero when M is infinite.
double maxmin_level(double radius, const RainModel& model, BoundKind kind, const SolverOptions& opts = {});

/// Largest radius whose flat max-min level still reaches `target`; the sensors
/// follow the disk. Throws InfeasibleError when the level at r_min falls short.
double maxmin_max_radius(double target, const RainModel& model, BoundKind kind, const SolverOptions& opts = {});

/// The region is the level set {p_bound / D > theta_star} of the sensor-bearing
/// domain; with a uniform density this is the set where lambda_s p_bound / D
/// exceeds lambda_s theta_star. At an interior optimum theta_star = B U*.
struct WaterfillSolution {
  double theta_star = 0.0;
  std::vector<std::pair<double, double>> region;  ///< (lo, hi] intervals
  double u_star = 0.0;
  BoundKind bound_kind = BoundKind::lower;
  bool monotone = true;  ///< the region was found as a disk

  Policy policy() const;
  double outer_radius() const { return region.empty() ? 0.0 : region.back().second; }
};

WaterfillSolution waterfill_policy(const WeightFunction& weights, double domain_radius, const RainModel& model,
                                   BoundKind kind, const SolverOptions& opts = {});

/// lambda_e int_region lambda_s p_bound / D dx / (1 + lambda_e B int_region lambda_s dx).
double waterfill_objective(const std::vector<std::pair<double, double>>& region, const WeightFunction& weights,
                           const RainModel& model, BoundKind kind);

struct CodSolution {
  Policy policy;
  double radius = 0.0;
};

/// Largest R with rho(R) >= target under Indicator(R), exact model, sensors on B(0, R).
CodSolution cod_policy(double target, const RainModel& model, const SolverOptions& opts = {});

/// rho at the edge of Indicator(radius) with the sensors restricted to B(0, radius).
double cod_edge_density(double radius, const RainModel& model);

struct Throughput {
  double exact = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// int over B(0, domain_radius) of rho / D, exact and with each bound.
Throughput total_throughput(const Policy& policy, const WeightFunction& weights, double domain_radius,
                            const RainModel& model);

}  // namespace erlang_rain
