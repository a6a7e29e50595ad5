#pragma once

// Hybrid deployment cost: cluster-heads on a triangular grid, each serving
// the transmit-only sensors of its own cell under a max-min policy.

#include <vector>

#include "erlang_rain/policies.hpp"

namespace erlang_rain {

struct CostParams {
  double c_s = 1.0;       ///< price of a transmit-only sensor
  double c_c = 10.0;      ///< price of a cluster-head
  double target_d = 1.0;  ///< required information density [1/(s m^2)]

  /// Throws ValidationError unless c_c >= c_s > 0 and target_d > 0.
  void validate() const;
};

/// Largest distance to the nearest head on a triangular grid of density lambda_c.
double r_max(double lambda_c);
/// Exact inverse of r_max: 16 / (R^2 3 sqrt 3). The variant 4 / (R^2 3 sqrt 3)
/// is off by a factor 4 and is not used.
double lambda_c_from_radius(double radius);
/// Grid density from the inter-head spacing L: 4 / (L^2 sqrt 3).
double lambda_c_from_spacing(double spacing);

/// Everything but the sensor density, which the cost solvers set themselves.
struct CellModel {
  PathLoss pathloss{1.0, 3.0};
  ChannelParams channel;
  QuadratureOptions quad;
  SolverOptions solver;
};

enum class CellPolicy { maxmin, naive };

/// Guaranteed density at the cell edge for sensors of density lambda_s on
/// B(0, R_max(lambda_c)). maxmin: the lower-bound flat level. naive: exact
/// rho at the cell edge under Indicator(R_0), the sensors covering
/// B(0, max(R_max, R_0)).
double cell_sensor_density(double lambda_s, double lambda_c, const CellModel& cell, CellPolicy policy);

/// Smallest lambda_c with lambda_e lambda_c + cell density >= target_d.
double required_lambda_c(double lambda_s, const CostParams& cost, const CellModel& cell,
                         CellPolicy policy = CellPolicy::maxmin);

struct CostSample {
  double lambda_s;
  double lambda_c;
  double cost_per_area;
};

struct CostCurve {
  std::vector<CostSample> samples;
  std::size_t optimum = 0;  ///< index of the cheapest sample
  double baseline = 0.0;    ///< c_c target_d / lambda_e: heads only
  double gain = 0.0;        ///< baseline / cheapest cost
};

CostCurve cost_sweep(const std::vector<double>& lambda_s_grid, const CostParams& cost, const CellModel& cell,
                     CellPolicy policy = CellPolicy::maxmin);

/// Re-prices a solved curve at c_c / c_s = ratio (c_s kept) and returns the gain.
double gain_at_ratio(const CostCurve& curve, const CostParams& cost, double ratio, double lambda_e);

struct GainRow {
  double ratio;
  double gain_maxmin;
  double gain_naive;
};

/// Gain versus the price ratio for both cell policies; each lambda_c(lambda_s)
/// curve is solved once and re-priced per ratio.
std::vector<GainRow> gain_sweep(const std::vector<double>& lambda_s_grid, const std::vector<double>& ratios,
                                const CostParams& cost, const CellModel& cell);

/// Exact rho at the cell edge under the max-min policy built for the cell:
/// the feasibility certificate lambda_e lambda_c + rho(R_max) >= target_d.
double certified_edge_density(double lambda_s, double lambda_c, const CellModel& cell);

}  // namespace erlang_rain
