#pragma once

// A complete run description: channel, geometry, policy choice, simulation
// and cost settings. Values are layered, later layers winning:
// built-in defaults < named profile < config file < command-line overrides.

#include <optional>
#include <string>
#include <vector>

#include "erlang_rain/config.hpp"
#include "erlang_rain/cost.hpp"
#include "erlang_rain/policies.hpp"
#include "erlang_rain/sim.hpp"

namespace erlang_rain {

struct DensitySpec {
  std::string kind = "uniform";  ///< uniform | piecewise | atomic
  double lambda_s = 1.0;
  double radius = 1.0;
  std::vector<double> edges;
  std::vector<double> values;
  std::vector<AtomicPoint> points;

  SpatialDensity build() const;
  bool operator==(const DensitySpec&) const = default;
};

struct WeightSpec {
  std::string kind = "constant";  ///< constant | piecewise
  double value = 1.0;
  std::vector<double> edges;
  std::vector<double> values;

  WeightFunction build() const;
  bool operator==(const WeightSpec&) const = default;
};

struct PolicySpec {
  /// indicator | constant | annuli | tabulated (given explicitly) or
  /// naive | maxmin | waterfill | cod (solved for).
  std::string kind = "indicator";
  double radius = 1.0;
  double value = 1.0;
  std::vector<std::pair<double, double>> intervals;
  std::vector<double> radii;
  std::vector<double> values;
  std::string bound = "lower";
  double target = 1.0;  ///< density target of the maxmin and cod solvers

  bool solved() const;
  bool operator==(const PolicySpec&) const = default;
};

struct SimSpec {
  std::uint64_t seed = 1;
  std::int64_t packets = 100000;   ///< admissible packets per replication when duration = 0
  std::int64_t replications = 8;
  double duration = 0.0;           ///< 0 derives it from `packets`
  double warmup = 0.0;
  double domain_radius = 0.0;
  double rho_radius = 0.0;         ///< 0 selects the policy reach, clipped to the domain
  std::int64_t annulus_bins = 10;
  std::int64_t batches = 32;

  bool operator==(const SimSpec&) const = default;
};

struct CostSpec {
  double c_s = 1.0;
  double c_c = 10.0;
  double target_d = 1.0;
  std::vector<double> lambda_s_grid{0.0, 1.0, 2.0, 5.0, 10.0, 20.0};
  std::vector<double> ratios{1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0};

  CostParams params() const { return {c_s, c_c, target_d}; }
  bool operator==(const CostSpec&) const = default;
};

struct Scenario {
  std::string profile;
  std::string output_dir = ".";
  double r_min = 0.1;          ///< radius grid of the curve outputs [m]
  double r_max = 100.0;
  std::int64_t grid_points = 200;
  double rel_tol = 1e-9;       ///< quadrature tolerance

  ChannelParams channel;
  double kappa = 1.0;
  double eta = 3.0;
  DensitySpec density;
  WeightSpec weights;
  PolicySpec policy;
  SimSpec sim;
  CostSpec cost;

  /// Throws ValidationError naming the first violated invariant.
  void validate() const;

  PathLoss pathloss() const { return PathLoss(kappa, eta); }
  RainModel model() const;
  SolverOptions solver() const;
  BoundKind bound() const { return bound_kind_from_string(policy.bound); }
  std::vector<double> radius_grid() const;

  bool operator==(const Scenario&) const = default;
};

/// Profile layer by name; throws ValidationError for an unknown name.
ConfigDoc profile_doc(const std::string& name);
std::vector<std::string> profile_names();

/// Applies a document over the built-in defaults and validates. Unknown
/// sections and keys are rejected.
Scenario scenario_from_doc(const ConfigDoc& doc);

/// Resolves the layers: profile (taken from the overrides, else the file),
/// file, overrides.
Scenario resolve_scenario(const std::optional<std::string>& path, const ConfigDoc& overrides = {});

Scenario load_scenario(const std::string& path);

/// Every key, fully resolved; load(save(s)) == s.
ConfigDoc scenario_to_doc(const Scenario& s);
std::string serialize_scenario(const Scenario& s);

/// Single-line JSON of the resolved scenario, for CSV manifests.
std::string scenario_manifest_json(const Scenario& s);

}  // namespace erlang_rain
