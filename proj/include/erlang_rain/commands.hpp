#pragma once

// Subcommands of the command-line tool as library calls, so tests can drive
// them without a process boundary. Each returns tables; writing them out,
// with the manifest line, is separate.

#include <iosfwd>
#include <string>
#include <vector>

#include "erlang_rain/scenario.hpp"

namespace erlang_rain {

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// `# manifest {...}` line, the header, then rows at 17 significant digits.
void write_csv(std::ostream& os, const Scenario& s, const CsvTable& table);

/// The scenario's policy and the model it was designed for. Solved policies
/// with their own domain (maxmin, cod) restrict the sensors to that disk.
struct ResolvedPolicy {
  Policy policy;
  RainModel model;
  double radius = 0.0;      ///< characteristic radius; 0 for explicit policies
  std::string radius_name;  ///< R_0, R_maxm, R*, R_COD
};

ResolvedPolicy resolve_policy(const Scenario& s);

/// Columns r,p_rec,p_rec_lower,p_rec_upper over the radius grid.
CsvTable cmd_prec(const Scenario& s);

struct PolicyOutput {
  ResolvedPolicy resolved;
  CsvTable policy;   ///< r,d
  CsvTable profile;  ///< r,rho,rho_lower,rho_upper
  std::string summary;
};

/// kind: naive | maxmin | waterfill | cod. Solver infeasibility propagates
/// as InfeasibleError.
PolicyOutput cmd_policy(const Scenario& s, const std::string& kind);

struct CostOutput {
  CsvTable sweep;  ///< lambda_s,lambda_c,cost
  CsvTable gains;  ///< ratio,gain,gain_naive
};

CostOutput cmd_cost(const Scenario& s);

struct Comparison {
  std::string name;
  double simulated = 0.0;
  double se = 0.0;
  double analytic = 0.0;
  double z = 0.0;
  bool passed = true;
};

struct ValidationReport {
  std::vector<Comparison> comparisons;
  GapTest idle_gaps;
  bool idle_gaps_checked = false;
  std::size_t packets = 0;
  bool passed = true;
  std::vector<std::string> failing;
};

/// Simulates `replications` independent runs (seeds seed, seed+1, ...) and
/// compares p_free, pi, the per-annulus reception fraction and the
/// conditional interference transform with the closed forms, plus the
/// idle-gap law. self_test doubles gamma on the analytic side only.
ValidationReport cmd_validate(const Scenario& s, int replications, bool self_test = false);

void write_report(std::ostream& os, const ValidationReport& r);

}  // namespace erlang_rain
