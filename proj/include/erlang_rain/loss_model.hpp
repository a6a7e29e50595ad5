#pragma once

// Closed forms of the M/D/1/1 Erlang loss system with interference: Laplace
// transforms of the integrated shot noise, acceptance and reception
// probabilities, information density and the policy-independent bounds.
//
// Two entry points share the same kernels:
//   * the spatial Poisson-rain form (RainModel + Policy), where received
//     powers come from the sensor intensity measure and the path loss;
//   * the generic form (PowerDistribution), where the mean received power of
//     a packet is drawn from a discrete distribution.
// Fading is Rayleigh (|h|^2 ~ Exp(1)) and the noise power is constant.

#include <functional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "erlang_rain/geometry.hpp"

namespace erlang_rain {

struct ChannelParams {
  double p_bar = 1.0;     ///< emitted power [W]
  double noise_w = 0.0;   ///< constant noise power [W]
  double gamma = 1.0;     ///< SINR threshold
  double b = 1.0;         ///< packet duration [s]
  double lambda_e = 0.0;  ///< packet emission rate per sensor [1/s]

  /// Throws ValidationError naming the first violated invariant.
  void validate() const;

  /// Effective threshold gamma / (p_bar * L(r)) seen by a packet emitted at distance r.
  double gamma_at(const PathLoss& pl, double r) const;

  bool operator==(const ChannelParams&) const = default;
};

/// Spatial admission probability d(r) in [0, 1].
class Policy {
 public:
  /// d(r) = 1 for r <= radius, 0 beyond.
  struct Indicator {
    double radius;
    bool operator==(const Indicator&) const = default;
  };
  /// d(r) = value everywhere.
  struct Constant {
    double value;
    bool operator==(const Constant&) const = default;
  };
  /// d(r) = 1 on the union of (lo, hi] intervals.
  struct Annuli {
    std::vector<std::pair<double, double>> intervals;
    bool operator==(const Annuli&) const = default;
  };
  /// Piecewise-linear through (radii[i], values[i]); a repeated radius
  /// encodes a jump, and the left value is used at the jump itself. Zero
  /// beyond the last node.
  struct Tabulated {
    std::vector<double> radii;
    std::vector<double> values;
    bool operator==(const Tabulated&) const = default;
  };
  using Repr = std::variant<Indicator, Constant, Annuli, Tabulated>;

  Policy() : repr_(Constant{1.0}) {}

  static Policy indicator(double radius);
  static Policy constant(double value);
  static Policy admit_all() { return constant(1.0); }
  static Policy admit_none() { return constant(0.0); }
  static Policy annuli(std::vector<std::pair<double, double>> intervals);
  static Policy tabulated(std::vector<double> radii, std::vector<double> values);

  double operator()(double r) const;

  /// Radii where d is discontinuous; quadratures split there.
  std::vector<double> breakpoints() const;

  /// Largest radius with d > 0 (infinity for a positive constant).
  double reach() const;

  const Repr& repr() const { return repr_; }
  std::string describe() const;

  bool operator==(const Policy&) const = default;

 private:
  explicit Policy(Repr r) : repr_(std::move(r)) {}
  Repr repr_;
};

/// Everything the spatial closed forms depend on.
struct RainModel {
  PathLoss pathloss{1.0, 3.0};
  SpatialDensity density = SpatialDensity::uniform(1.0, 1.0);
  ChannelParams channel;
  QuadratureOptions quad;
};

struct PowerAtom {
  double power;  ///< mean received power [W]
  double prob;
};

/// Discrete law of the mean received power of a packet.
class PowerDistribution {
 public:
  /// Throws ValidationError unless powers and probabilities are positive and
  /// the probabilities sum to 1 within 1e-12.
  explicit PowerDistribution(std::vector<PowerAtom> atoms);

  const std::vector<PowerAtom>& atoms() const { return atoms_; }

 private:
  std::vector<PowerAtom> atoms_;
};

struct ReceptionBounds {
  double lower;
  double upper;
};

struct RhoValue {
  double exact;
  double lower;
  double upper;
};

struct ReceptionCurve {
  std::vector<double> radii;
  std::vector<double> p_rec;
  std::vector<double> p_rec_lower;
  std::vector<double> p_rec_upper;
  std::vector<double> rho;
  std::vector<double> rho_lower;
  std::vector<double> rho_upper;
  double p_free = 1.0;
};

// --- spatial form -----------------------------------------------------------

/// lambda = lambda_e * int d dLambda_s: intensity of admissible packets.
double lambda_admissible(const RainModel& model, const Policy& policy);

/// Erlang acceptance probability 1 / (1 + lambda * b).
double p_free(double lambda, double b);

/// lambda_e * int d(x) phi(xi p_bar L(x)) Lambda_s(dx).
double admitted_phi_mass(const RainModel& model, const Policy& policy, double xi);
/// lambda_e * int (1 - d(x)) phi(xi p_bar L(x)) Lambda_s(dx).
double rejected_phi_mass(const RainModel& model, const Policy& policy, double xi);

/// Transform of the interference from admissible packets arriving during the reception.
double laplace_L1(const RainModel& model, const Policy& policy, double xi);
/// Transform of the interference from admissible packets already on the air at arrival.
double laplace_L2(const RainModel& model, const Policy& policy, double xi);
/// Transform of the interference from non-admissible packets.
double laplace_LJB(const RainModel& model, const Policy& policy, double xi);
/// Policy-independent kernel exp(-lambda_e b int phi(xi p_bar L) dLambda_s).
double laplace_calL(const RainModel& model, double xi);
/// exp(-xi W) for a constant noise power.
double laplace_W(double xi, const ChannelParams& ch);

/// Probability that an accepted packet emitted at distance r is decoded.
double p_rec(const RainModel& model, const Policy& policy, double r);
/// lower = L_W calL^2, upper = L_W calL at xi = gamma_r. Independent of the policy.
ReceptionBounds p_rec_bounds(const RainModel& model, double r);

/// Density of received information at distance r with the exact reception
/// probability and with each bound substituted.
RhoValue rho(const RainModel& model, const Policy& policy, double r);

ReceptionCurve reception_curve(const RainModel& model, const Policy& policy,
                               const std::vector<double>& radii);

// --- generic form -----------------------------------------------------------

double laplace_L1_generic(const PowerDistribution& powers, double lambda, double b, double xi);
double laplace_L2_generic(const PowerDistribution& powers, double lambda, double b, double xi);

/// Long-run fraction of packets decoded by the loss system fed by a Poisson
/// stream of intensity lambda with i.i.d. mean powers. `external` is the
/// Laplace transform of an independent time-averaged external interference,
/// multiplied in when present.
double erlang_pi(const PowerDistribution& powers, double lambda, const ChannelParams& ch,
                 const std::function<double(double)>& external = {});

namespace detail {

/// exp(-lambda b) + lambda b int_0^1 exp(-lambda b (1 - t) - b t mass(t xi)) dt,
/// with `mass` the admitted phi-mass; this is L2 in both forms.
double laplace_L2_from_mass(double lambda, double b, double xi,
                            const std::function<double(double)>& mass);

/// p_rec with the admissible intensity supplied by the caller, for loops
/// that evaluate many radii under one policy.
double p_rec_given_lambda(const RainModel& model, const Policy& policy, double r, double lambda);

}  // namespace detail

}  // namespace erlang_rain
