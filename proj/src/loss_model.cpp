#include "erlang_rain/loss_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace erlang_rain {

void ChannelParams::validate() const {
  if (!(p_bar > 0.0) || !std::isfinite(p_bar)) throw ValidationError("p_bar must be positive");
  if (!(noise_w >= 0.0) || !std::isfinite(noise_w)) throw ValidationError("noise_w must be non-negative");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ValidationError("gamma must be positive");
  if (!(b > 0.0) || !std::isfinite(b)) throw ValidationError("b must be positive");
  if (!(lambda_e >= 0.0) || !std::isfinite(lambda_e)) throw ValidationError("lambda_e must be non-negative");
}

double ChannelParams::gamma_at(const PathLoss& pl, double r) const {
  return gamma / (p_bar * attenuation(pl, r));
}

// --- Policy -----------------------------------------------------------------

Policy Policy::indicator(double radius) {
  if (!(radius >= 0.0) || std::isnan(radius)) throw ValidationError("indicator radius must be non-negative");
  return Policy(Indicator{radius});
}

Policy Policy::constant(double value) {
  if (!(value >= 0.0 && value <= 1.0)) throw ValidationError("admission probability must lie in [0, 1]");
  return Policy(Constant{value});
}

Policy Policy::annuli(std::vector<std::pair<double, double>> intervals) {
  std::sort(intervals.begin(), intervals.end());
  double prev = 0.0;
  for (const auto& [lo, hi] : intervals) {
    if (!(lo >= prev) || !(hi > lo) || !std::isfinite(hi)) {
      throw ValidationError("admission annuli must be disjoint, ordered and non-empty");
    }
    prev = hi;
  }
  return Policy(Annuli{std::move(intervals)});
}

Policy Policy::tabulated(std::vector<double> radii, std::vector<double> values) {
  if (radii.size() != values.size() || radii.size() < 2) {
    throw ValidationError("tabulated policy needs at least two nodes and one value per node");
  }
  if (!(radii.front() >= 0.0)) throw ValidationError("tabulated policy radii must be non-negative");
  for (std::size_t i = 1; i < radii.size(); ++i) {
    if (!(radii[i] >= radii[i - 1]) || !std::isfinite(radii[i])) {
      throw ValidationError("tabulated policy radii must be non-decreasing");
    }
    if (i >= 2 && radii[i] == radii[i - 2]) {
      throw ValidationError("tabulated policy: at most two nodes may share a radius");
    }
  }
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("admission probability must lie in [0, 1]");
  }
  return Policy(Tabulated{std::move(radii), std::move(values)});
}

double Policy::operator()(double r) const {
  return std::visit(
      [r](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Indicator>) {
          return r <= p.radius ? 1.0 : 0.0;
        } else if constexpr (std::is_same_v<T, Constant>) {
          return p.value;
        } else if constexpr (std::is_same_v<T, Annuli>) {
          for (const auto& [lo, hi] : p.intervals) {
            if ((r > lo || (r == lo && lo == 0.0)) && r <= hi) return 1.0;
          }
          return 0.0;
        } else {
          const auto& x = p.radii;
          if (r > x.back()) return 0.0;
          if (r <= x.front()) return p.values.front();
          const auto it = std::lower_bound(x.begin(), x.end(), r);
          const auto i = static_cast<std::size_t>(it - x.begin());
          if (x[i] == r) return p.values[i];
          const double w = (r - x[i - 1]) / (x[i] - x[i - 1]);
          return p.values[i - 1] + w * (p.values[i] - p.values[i - 1]);
        }
      },
      repr_);
}

std::vector<double> Policy::breakpoints() const {
  return std::visit(
      [](const auto& p) -> std::vector<double> {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Indicator>) {
          return {p.radius};
        } else if constexpr (std::is_same_v<T, Constant>) {
          return {};
        } else if constexpr (std::is_same_v<T, Annuli>) {
          std::vector<double> out;
          for (const auto& [lo, hi] : p.intervals) {
            out.push_back(lo);
            out.push_back(hi);
          }
          return out;
        } else {
          std::vector<double> out;
          for (std::size_t i = 1; i < p.radii.size(); ++i) {
            if (p.radii[i] == p.radii[i - 1]) out.push_back(p.radii[i]);
          }
          out.push_back(p.radii.back());
          return out;
        }
      },
      repr_);
}

double Policy::reach() const {
  return std::visit(
      [](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Indicator>) {
          return p.radius;
        } else if constexpr (std::is_same_v<T, Constant>) {
          return p.value > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
        } else if constexpr (std::is_same_v<T, Annuli>) {
          return p.intervals.empty() ? 0.0 : p.intervals.back().second;
        } else {
          for (std::size_t i = p.values.size(); i-- > 0;) {
            if (p.values[i] > 0.0) return i + 1 < p.radii.size() ? p.radii[i + 1] : p.radii[i];
          }
          return 0.0;
        }
      },
      repr_);
}

std::string Policy::describe() const {
  std::ostringstream os;
  os.precision(10);
  std::visit(
      [&os](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Indicator>) {
          os << "indicator(radius=" << p.radius << ")";
        } else if constexpr (std::is_same_v<T, Constant>) {
          os << "constant(" << p.value << ")";
        } else if constexpr (std::is_same_v<T, Annuli>) {
          os << "annuli(";
          for (const auto& [lo, hi] : p.intervals) os << "(" << lo << "," << hi << "]";
          os << ")";
        } else {
          os << "tabulated(" << p.radii.size() << " nodes on [" << p.radii.front() << ", "
             << p.radii.back() << "])";
        }
      },
      repr_);
  return os.str();
}

// --- PowerDistribution --------------------------------------------------------

PowerDistribution::PowerDistribution(std::vector<PowerAtom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw ValidationError("power distribution needs at least one atom");
  double total = 0.0;
  for (const PowerAtom& a : atoms_) {
    if (!(a.power > 0.0) || !std::isfinite(a.power)) throw ValidationError("atom powers must be positive");
    if (!(a.prob > 0.0)) throw ValidationError("atom probabilities must be positive");
    total += a.prob;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ValidationError("atom probabilities must sum to 1");
}

// --- spatial form -------------------------------------------------------------

namespace {

double phi_mass(const RainModel& model, double xi, const std::function<double(double)>& weight,
                const std::vector<double>& breaks) {
  const ChannelParams& ch = model.channel;
  if (ch.lambda_e == 0.0 || xi == 0.0) return 0.0;
  const double scale = xi * ch.p_bar;
  const PathLoss& pl = model.pathloss;
  auto f = [&](double r) {
    const double w = weight(r);
    if (w == 0.0) return 0.0;
    return w * phi(scale * pl.gain(r));
  };
  return ch.lambda_e * radial_integral(f, model.density, model.quad, breaks);
}

}  // namespace

double lambda_admissible(const RainModel& model, const Policy& policy) {
  if (model.channel.lambda_e == 0.0) return 0.0;
  const std::vector<double> breaks = policy.breakpoints();
  return model.channel.lambda_e * radial_integral([&](double r) { return policy(r); }, model.density,
                                                  model.quad, breaks);
}

double p_free(double lambda, double b) {
  if (!(lambda >= 0.0)) throw DomainError("p_free: lambda must be non-negative");
  if (!(b > 0.0)) throw DomainError("p_free: packet duration must be positive");
  return 1.0 / (1.0 + lambda * b);
}

double admitted_phi_mass(const RainModel& model, const Policy& policy, double xi) {
  if (!(xi >= 0.0)) throw DomainError("Laplace argument must be non-negative");
  return phi_mass(model, xi, [&](double r) { return policy(r); }, policy.breakpoints());
}

double rejected_phi_mass(const RainModel& model, const Policy& policy, double xi) {
  if (!(xi >= 0.0)) throw DomainError("Laplace argument must be non-negative");
  return phi_mass(model, xi, [&](double r) { return 1.0 - policy(r); }, policy.breakpoints());
}

double laplace_L1(const RainModel& model, const Policy& policy, double xi) {
  return std::exp(-model.channel.b * admitted_phi_mass(model, policy, xi));
}

double laplace_L2(const RainModel& model, const Policy& policy, double xi) {
  if (!(xi >= 0.0)) throw DomainError("Laplace argument must be non-negative");
  const double lambda = lambda_admissible(model, policy);
  return detail::laplace_L2_from_mass(lambda, model.channel.b, xi,
                                      [&](double x) { return admitted_phi_mass(model, policy, x); });
}

double laplace_LJB(const RainModel& model, const Policy& policy, double xi) {
  return std::exp(-2.0 * model.channel.b * rejected_phi_mass(model, policy, xi));
}

double laplace_calL(const RainModel& model, double xi) {
  return laplace_L1(model, Policy::admit_all(), xi);
}

double laplace_W(double xi, const ChannelParams& ch) {
  if (!(xi >= 0.0)) throw DomainError("Laplace argument must be non-negative");
  if (ch.noise_w == 0.0) return 1.0;
  return std::exp(-xi * ch.noise_w);
}

namespace detail {

double p_rec_given_lambda(const RainModel& model, const Policy& policy, double r, double lambda) {
  const ChannelParams& ch = model.channel;
  const double xi = ch.gamma_at(model.pathloss, r);
  const double lw = laplace_W(xi, ch);
  if (ch.lambda_e == 0.0 || lw == 0.0) return lw;
  const double l1 = std::exp(-ch.b * admitted_phi_mass(model, policy, xi));
  const double ljb = std::exp(-2.0 * ch.b * rejected_phi_mass(model, policy, xi));
  const double l2 = detail::laplace_L2_from_mass(
      lambda, ch.b, xi, [&](double x) { return admitted_phi_mass(model, policy, x); });
  return lw * l1 * l2 * ljb;
}

}  // namespace detail

double p_rec(const RainModel& model, const Policy& policy, double r) {
  if (!(r > 0.0)) throw DomainError("p_rec: distance must be positive");
  return detail::p_rec_given_lambda(model, policy, r, lambda_admissible(model, policy));
}

ReceptionBounds p_rec_bounds(const RainModel& model, double r) {
  if (!(r > 0.0)) throw DomainError("p_rec_bounds: distance must be positive");
  const double xi = model.channel.gamma_at(model.pathloss, r);
  const double lw = laplace_W(xi, model.channel);
  const double cal = laplace_calL(model, xi);
  return {lw * cal * cal, lw * cal};
}

RhoValue rho(const RainModel& model, const Policy& policy, double r) {
  const double base = model.channel.lambda_e * model.density.intensity_at(r) * policy(r);
  if (base == 0.0) return {0.0, 0.0, 0.0};
  const double lambda = lambda_admissible(model, policy);
  const double pf = p_free(lambda, model.channel.b);
  const double exact = detail::p_rec_given_lambda(model, policy, r, lambda);
  const ReceptionBounds bnd = p_rec_bounds(model, r);
  return {base * pf * exact, base * pf * bnd.lower, base * pf * bnd.upper};
}

ReceptionCurve reception_curve(const RainModel& model, const Policy& policy,
                               const std::vector<double>& radii) {
  ReceptionCurve c;
  c.radii = radii;
  const double lambda = lambda_admissible(model, policy);
  c.p_free = p_free(lambda, model.channel.b);
  for (double r : radii) {
    if (!(r > 0.0)) throw DomainError("reception curve: radii must be positive");
    const double exact = detail::p_rec_given_lambda(model, policy, r, lambda);
    const ReceptionBounds bnd = p_rec_bounds(model, r);
    const double base = model.channel.lambda_e * model.density.intensity_at(r) * policy(r) * c.p_free;
    c.p_rec.push_back(exact);
    c.p_rec_lower.push_back(bnd.lower);
    c.p_rec_upper.push_back(bnd.upper);
    c.rho.push_back(base * exact);
    c.rho_lower.push_back(base * bnd.lower);
    c.rho_upper.push_back(base * bnd.upper);
  }
  return c;
}

// --- generic form -------------------------------------------------------------

namespace {

double generic_mass(const PowerDistribution& powers, double lambda, double xi) {
  double s = 0.0;
  for (const PowerAtom& a : powers.atoms()) s += a.prob * phi(xi * a.power);
  return lambda * s;
}

}  // namespace

double laplace_L1_generic(const PowerDistribution& powers, double lambda, double b, double xi) {
  if (!(xi >= 0.0)) throw DomainError("Laplace argument must be non-negative");
  return std::exp(-b * generic_mass(powers, lambda, xi));
}

double laplace_L2_generic(const PowerDistribution& powers, double lambda, double b, double xi) {
  if (!(xi >= 0.0)) throw DomainError("Laplace argument must be non-negative");
  return detail::laplace_L2_from_mass(lambda, b, xi,
                                      [&](double x) { return generic_mass(powers, lambda, x); });
}

double erlang_pi(const PowerDistribution& powers, double lambda, const ChannelParams& ch,
                 const std::function<double(double)>& external) {
  ch.validate();
  if (!(lambda >= 0.0)) throw DomainError("erlang_pi: lambda must be non-negative");
  double s = 0.0;
  for (const PowerAtom& a : powers.atoms()) {
    const double xi = ch.gamma / a.power;
    double term = laplace_W(xi, ch) * laplace_L1_generic(powers, lambda, ch.b, xi) *
                  laplace_L2_generic(powers, lambda, ch.b, xi);
    if (external) term *= external(xi);
    s += a.prob * term;
  }
  return p_free(lambda, ch.b) * s;
}

namespace detail {

double laplace_L2_from_mass(double lambda, double b, double xi,
                            const std::function<double(double)>& mass) {
  const double lb = lambda * b;
  if (lb == 0.0) return 1.0;
  auto integrand = [&](double t) {
    const double m = (xi == 0.0) ? 0.0 : mass(t * xi);
    return std::exp(-lb * (1.0 - t) - b * t * m);
  };
  // The integrand is bounded by exp(-lb (1 - t)); when lb is large its mass
  // concentrates near t = 1 and a single 64-point panel no longer resolves it.
  constexpr double kPanelDecay = 20.0;
  constexpr double kCutoffDecay = 40.0;
  double integral = 0.0;
  if (lb <= kPanelDecay) {
    integral = integrate_gauss64(integrand, 0.0, 1.0);
  } else {
    const double start = std::max(0.0, 1.0 - kCutoffDecay / lb);
    const int panels = static_cast<int>(std::ceil((1.0 - start) * lb / kPanelDecay));
    const double width = (1.0 - start) / panels;
    for (int i = 0; i < panels; ++i) {
      integral += integrate_gauss64(integrand, start + i * width, start + (i + 1) * width);
    }
  }
  return std::exp(-lb) + lb * integral;
}

}  // namespace detail

}  // namespace erlang_rain
