#pragma once

// Path loss, radial intensity measures, and the radial integration that
// realizes every integral against the sensor intensity measure.

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "erlang_rain/errors.hpp"
#include "erlang_rain/quadrature.hpp"

namespace erlang_rain {

/// Power-law attenuation L(r) = kappa * r^-eta.
class PathLoss {
 public:
  /// Throws ValidationError unless kappa > 0 and eta > 2.
  PathLoss(double kappa, double eta);

  double kappa() const { return kappa_; }
  double eta() const { return eta_; }

  /// Gain at distance r > 0. Returns +inf at r == 0 (used only inside
  /// integrands, where every kernel is bounded).
  double gain(double r) const { return kappa_ * std::pow(r, -eta_); }

  /// Distance at which the gain equals g (g > 0).
  double inverse(double g) const { return std::pow(kappa_ / g, 1.0 / eta_); }

  bool operator==(const PathLoss&) const = default;

 private:
  double kappa_;
  double eta_;
};

/// kappa * r^-eta; throws DomainError for r <= 0.
double attenuation(const PathLoss& pl, double r);

/// phi(u) = 1 - log(1 + u) / u with phi(0) = 0 and phi(inf) = 1.
/// Throws DomainError for u < 0 or NaN.
double phi(double u);

/// Piecewise-constant function of the radius. Piece i covers
/// (edges[i-1], edges[i]] with edges[-1] = 0, so values are taken from the
/// left at breakpoints.
class RadialProfile {
 public:
  RadialProfile() = default;
  RadialProfile(std::vector<double> edges, std::vector<double> values);

  static RadialProfile uniform(double value, double radius);

  /// Value at r; 0 beyond the last edge.
  double at(double r) const;
  /// Value at r; the last piece is extended beyond the last edge.
  double at_extended(double r) const;

  double outer_radius() const { return edges_.empty() ? 0.0 : edges_.back(); }
  const std::vector<double>& edges() const { return edges_; }
  const std::vector<double>& values() const { return values_; }

  /// Profile restricted to [0, radius].
  RadialProfile truncated(double radius) const;

  bool operator==(const RadialProfile&) const = default;

 private:
  std::vector<double> edges_;
  std::vector<double> values_;
};

struct AtomicPoint {
  double x = 0.0;
  double y = 0.0;
  double weight = 1.0;

  double radius() const { return std::hypot(x, y); }
  bool operator==(const AtomicPoint&) const = default;
};

/// Sensor intensity measure: a radial density (sensors per m^2) with compact
/// support, or a finite set of weighted sensor locations.
class SpatialDensity {
 public:
  struct Radial {
    RadialProfile profile;
    bool operator==(const Radial&) const = default;
  };
  struct Atomic {
    std::vector<AtomicPoint> points;
    bool operator==(const Atomic&) const = default;
  };

  /// Throws ValidationError for negative densities, infinite support, or
  /// weights below 1.
  static SpatialDensity radial(RadialProfile profile);
  static SpatialDensity uniform(double lambda_s, double support_radius);
  static SpatialDensity atomic(std::vector<AtomicPoint> points);

  bool is_radial() const { return std::holds_alternative<Radial>(repr_); }
  bool is_atomic() const { return std::holds_alternative<Atomic>(repr_); }
  const RadialProfile& profile() const { return std::get<Radial>(repr_).profile; }
  const std::vector<AtomicPoint>& points() const { return std::get<Atomic>(repr_).points; }

  /// Radial: lambda_s(r). Atomic: total weight of the points at distance
  /// exactly r (a point mass, so rates derived from it are per sensor).
  double intensity_at(double r) const;

  /// Radius of the smallest centered disk containing the support.
  double support_radius() const;

  /// Total mass Lambda_s(R^2).
  double total_mass() const;

  /// Mass of the annulus (r_lo, r_hi].
  double annulus_mass(double r_lo, double r_hi) const;

  /// Radii at which the density is discontinuous (Radial) or the point radii (Atomic).
  std::vector<double> breakpoints() const;

  /// Measure restricted to the disk B(0, radius).
  SpatialDensity truncated(double radius) const;

  bool operator==(const SpatialDensity&) const = default;

 private:
  std::variant<Radial, Atomic> repr_;
};

/// Strictly positive piecewise-constant weight D(r); the last piece extends
/// to infinity.
class WeightFunction {
 public:
  WeightFunction() : profile_(RadialProfile::uniform(1.0, 1.0)) {}
  explicit WeightFunction(RadialProfile profile);
  static WeightFunction constant(double value);

  double operator()(double r) const { return profile_.at_extended(r); }
  const RadialProfile& profile() const { return profile_; }
  std::vector<double> breakpoints() const;

  bool operator==(const WeightFunction&) const = default;

 private:
  RadialProfile profile_;
};

/// Sorted, de-duplicated copy of the union of breakpoint lists clipped to [lo, hi],
/// with lo and hi included.
std::vector<double> merge_breakpoints(double lo, double hi,
                                      std::initializer_list<std::span<const double>> lists);

/// Integral of f(|x|) against the measure: 2*pi * int f(r) lambda_s(r) r dr for
/// a radial density, sum_i w_i f(|X_i|) for an atomic one. `extra_breaks`
/// are radii where f itself is discontinuous. Radial integrals never extend
/// past the support.
template <class F>
double radial_integral(F&& f, const SpatialDensity& density, const QuadratureOptions& opts = {},
                       std::span<const double> extra_breaks = {}) {
  if (density.is_atomic()) {
    double s = 0.0;
    for (const AtomicPoint& p : density.points()) s += p.weight * f(p.radius());
    return s;
  }
  const RadialProfile& prof = density.profile();
  const double support = prof.outer_radius();
  if (!(support > 0.0)) return 0.0;
  const std::vector<double> edges = merge_breakpoints(0.0, support, {prof.edges(), extra_breaks});
  // Density pieces are right-closed, so each piece takes its value from the
  // interior rather than from an edge.
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double a = edges[i];
    const double b = edges[i + 1];
    const double lam = prof.at(0.5 * (a + b));
    if (lam == 0.0) continue;
    const std::array<double, 2> piece{a, b};
    s += lam * integrate_pieces([&](double r) { return r == 0.0 ? 0.0 : f(r) * r; }, piece, opts);
  }
  return 2.0 * std::numbers::pi * s;
}

}  // namespace erlang_rain
