#include "erlang_rain/geometry.hpp"

#include <algorithm>
#include <limits>

namespace erlang_rain {

PathLoss::PathLoss(double kappa, double eta) : kappa_(kappa), eta_(eta) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ValidationError("kappa must be positive");
  if (!(eta > 2.0) || !std::isfinite(eta)) {
    throw ValidationError("eta must exceed 2 for the interference integrals to converge");
  }
}

double attenuation(const PathLoss& pl, double r) {
  if (!(r > 0.0)) throw DomainError("attenuation: distance must be positive");
  return pl.gain(r);
}

double phi(double u) {
  if (!(u >= 0.0)) throw DomainError("phi: argument must be non-negative");
  if (u < 1e-4) {
    // 1 - log1p(u)/u cancels catastrophically here.
    return u * (0.5 - u * (1.0 / 3.0 - u * (0.25 - u * 0.2)));
  }
  if (std::isinf(u)) return 1.0;
  if (u < 0.5) {
    // Same log form, written as log1p(u) = 2 atanh(s) with s = u / (2 + u):
    // u - log1p(u) = u^2 / (2 + u) - 2 (s^3/3 + s^5/5 + ...), which keeps the
    // relative error at roundoff where 1 - log1p(u)/u would lose ~12 digits.
    const double s = u / (2.0 + u);
    const double s2 = s * s;
    double tail = 0.0;
    for (int k = 14; k >= 1; --k) tail = s2 * (1.0 / (2 * k + 1) + tail);
    return (u * u / (2.0 + u) - 2.0 * s * tail) / u;
  }
  return 1.0 - std::log1p(u) / u;
}

// ---------------------------------------------------------------------------

RadialProfile::RadialProfile(std::vector<double> edges, std::vector<double> values)
    : edges_(std::move(edges)), values_(std::move(values)) {
  if (edges_.size() != values_.size()) {
    throw ValidationError("radial profile: edges and values must have equal length");
  }
  if (edges_.empty()) throw ValidationError("radial profile: at least one piece is required");
  double prev = 0.0;
  for (double e : edges_) {
    if (!(e > prev) || !std::isfinite(e)) {
      throw ValidationError("radial profile: edges must be finite and strictly increasing from 0");
    }
    prev = e;
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw ValidationError("radial profile: values must be finite");
  }
}

RadialProfile RadialProfile::uniform(double value, double radius) {
  return RadialProfile({radius}, {value});
}

double RadialProfile::at(double r) const {
  if (edges_.empty() || r > edges_.back()) return 0.0;
  return at_extended(r);
}

double RadialProfile::at_extended(double r) const {
  if (edges_.empty()) return 0.0;
  const auto it = std::lower_bound(edges_.begin(), edges_.end(), r);
  if (it == edges_.end()) return values_.back();
  return values_[static_cast<std::size_t>(it - edges_.begin())];
}

RadialProfile RadialProfile::truncated(double radius) const {
  if (!(radius > 0.0)) throw ValidationError("radial profile: truncation radius must be positive");
  std::vector<double> e;
  std::vector<double> v;
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    e.push_back(std::min(edges_[i], radius));
    v.push_back(values_[i]);
    if (edges_[i] >= radius) break;
  }
  if (e.back() < radius) {
    // Beyond the original support the profile is zero.
    e.push_back(radius);
    v.push_back(0.0);
  }
  return RadialProfile(std::move(e), std::move(v));
}

// ---------------------------------------------------------------------------

SpatialDensity SpatialDensity::radial(RadialProfile profile) {
  for (double v : profile.values()) {
    if (v < 0.0) throw ValidationError("density must be non-negative");
  }
  SpatialDensity d;
  d.repr_ = Radial{std::move(profile)};
  return d;
}

SpatialDensity SpatialDensity::uniform(double lambda_s, double support_radius) {
  if (!(support_radius > 0.0) || !std::isfinite(support_radius)) {
    throw ValidationError("density support radius must be positive and finite");
  }
  return radial(RadialProfile::uniform(lambda_s, support_radius));
}

SpatialDensity SpatialDensity::atomic(std::vector<AtomicPoint> points) {
  for (const AtomicPoint& p : points) {
    if (!(p.weight >= 1.0) || !std::isfinite(p.weight)) {
      throw ValidationError("atomic sensor weights must be at least 1");
    }
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw ValidationError("atomic sensor locations must be finite");
    }
    if (p.radius() == 0.0) {
      throw ValidationError("no sensor may sit at the receiver location");
    }
  }
  SpatialDensity d;
  d.repr_ = Atomic{std::move(points)};
  return d;
}

double SpatialDensity::intensity_at(double r) const {
  if (is_radial()) return profile().at(r);
  double w = 0.0;
  for (const AtomicPoint& p : points()) {
    if (p.radius() == r) w += p.weight;
  }
  return w;
}

double SpatialDensity::support_radius() const {
  if (is_radial()) return profile().outer_radius();
  double r = 0.0;
  for (const AtomicPoint& p : points()) r = std::max(r, p.radius());
  return r;
}

double SpatialDensity::annulus_mass(double r_lo, double r_hi) const {
  if (!(r_hi > r_lo)) return 0.0;
  if (is_atomic()) {
    double w = 0.0;
    for (const AtomicPoint& p : points()) {
      const double r = p.radius();
      if ((r > r_lo || (r_lo == 0.0 && r == 0.0)) && r <= r_hi) w += p.weight;
    }
    return w;
  }
  const RadialProfile& prof = profile();
  double mass = 0.0;
  double inner = 0.0;
  for (std::size_t i = 0; i < prof.edges().size(); ++i) {
    const double outer = prof.edges()[i];
    const double a = std::max(inner, r_lo);
    const double b = std::min(outer, r_hi);
    if (b > a) mass += prof.values()[i] * std::numbers::pi * (b * b - a * a);
    inner = outer;
  }
  return mass;
}

double SpatialDensity::total_mass() const {
  return annulus_mass(0.0, std::numeric_limits<double>::infinity());
}

std::vector<double> SpatialDensity::breakpoints() const {
  if (is_radial()) return profile().edges();
  std::vector<double> r;
  for (const AtomicPoint& p : points()) r.push_back(p.radius());
  std::sort(r.begin(), r.end());
  r.erase(std::unique(r.begin(), r.end()), r.end());
  return r;
}

SpatialDensity SpatialDensity::truncated(double radius) const {
  if (is_radial()) return radial(profile().truncated(radius));
  std::vector<AtomicPoint> kept;
  for (const AtomicPoint& p : points()) {
    if (p.radius() <= radius) kept.push_back(p);
  }
  return atomic(std::move(kept));
}

// ---------------------------------------------------------------------------

WeightFunction::WeightFunction(RadialProfile profile) : profile_(std::move(profile)) {
  for (double v : profile_.values()) {
    if (!(v > 0.0)) throw ValidationError("weights must be strictly positive");
  }
}

WeightFunction WeightFunction::constant(double value) {
  return WeightFunction(RadialProfile::uniform(value, 1.0));
}

std::vector<double> WeightFunction::breakpoints() const {
  std::vector<double> e = profile_.edges();
  if (!e.empty()) e.pop_back();  // the last piece extends to infinity
  return e;
}

std::vector<double> merge_breakpoints(double lo, double hi,
                                      std::initializer_list<std::span<const double>> lists) {
  std::vector<double> out{lo, hi};
  for (std::span<const double> l : lists) {
    for (double x : l) {
      if (x > lo && x < hi) out.push_back(x);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace erlang_rain
