#include "erlang_rain/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

namespace erlang_rain {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Ratio estimator S/A with a batch-means standard error.
Estimate batch_ratio(const std::vector<std::size_t>& num, const std::vector<std::size_t>& den) {
  Estimate e;
  std::size_t s = 0;
  std::size_t a = 0;
  for (std::size_t k = 0; k < num.size(); ++k) {
    s += num[k];
    a += den[k];
  }
  e.n = a;
  if (a == 0) return e;
  e.value = static_cast<double>(s) / static_cast<double>(a);
  const double k = static_cast<double>(num.size());
  double ss = 0.0;
  for (std::size_t i = 0; i < num.size(); ++i) {
    const double dev = static_cast<double>(num[i]) - e.value * static_cast<double>(den[i]);
    ss += dev * dev;
  }
  e.se = std::sqrt(ss / (k * (k - 1.0))) / (static_cast<double>(a) / k);
  return e;
}

std::vector<AnnulusEstimate> annulus_estimates(const AnnulusGrid& grid, const std::vector<std::size_t>& arr,
                                               const std::vector<std::size_t>& acc,
                                               const std::vector<std::size_t>& succ, double duration) {
  std::vector<AnnulusEstimate> out(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    AnnulusEstimate& a = out[k];
    a.r_lo = grid.edges[k];
    a.r_hi = grid.edges[k + 1];
    a.present = grid.present[k];
    a.arrivals = arr[k];
    a.accepted = acc[k];
    a.successes = succ[k];
    if (!a.present) continue;
    const double norm = duration * std::numbers::pi * (a.r_hi * a.r_hi - a.r_lo * a.r_lo);
    a.rho = static_cast<double>(a.successes) / norm;
    a.rho_se = std::sqrt(static_cast<double>(a.successes)) / norm;
    if (a.accepted > 0) {
      const double n = static_cast<double>(a.accepted);
      a.p_rec = static_cast<double>(a.successes) / n;
      a.p_rec_se = std::sqrt(a.p_rec * (1.0 - a.p_rec) / n);
    }
  }
  return out;
}

bool counted(double t, const SimConfig& cfg) { return t >= 0.0 && t < cfg.duration; }

}  // namespace

SimConfig SimConfig::resolved(double b, double support_radius) const {
  SimConfig c = *this;
  if (c.warmup == 0.0) c.warmup = 20.0 * b;
  if (c.domain_radius == 0.0) c.domain_radius = support_radius;
  if (c.rho_radius == 0.0) c.rho_radius = c.domain_radius;
  if (!(c.warmup >= 2.0 * b)) throw ValidationError("sim warmup must be at least 2 B");
  if (!(c.duration > c.warmup) || !std::isfinite(c.duration))
    throw ValidationError("sim duration must exceed the warmup");
  if (!(c.domain_radius >= support_radius * (1.0 - 1e-12)))
    throw ValidationError("sim domain must contain the sensor support");
  if (!(c.rho_radius > 0.0) && support_radius > 0.0) throw ValidationError("annulus grid radius must be positive");
  if (c.annulus_bins < 1) throw ValidationError("annulus_bins must be at least 1");
  if (c.batches < 2) throw ValidationError("batches must be at least 2");
  return c;
}

// --- rain -------------------------------------------------------------------

RainSource::RainSource(const SimConfig& cfg, const RainModel& model, const Policy& policy)
    : cfg_(cfg.resolved(model.channel.b, model.density.support_radius())),
      rng_(splitmix64(cfg.seed)),
      model_(model),
      policy_(policy) {
  model.channel.validate();
  const SpatialDensity& dens = model.density;
  double total = 0.0;
  if (dens.is_atomic()) {
    for (const AtomicPoint& p : dens.points()) {
      total += p.weight;
      cum_.push_back(total);
    }
  } else {
    const RadialProfile& prof = dens.profile();
    double lo = 0.0;
    for (std::size_t i = 0; i < prof.edges().size(); ++i) {
      const double hi = prof.edges()[i];
      total += prof.values()[i] * std::numbers::pi * (hi * hi - lo * lo);
      cum_.push_back(total);
      piece_lo_.push_back(lo);
      piece_hi_.push_back(hi);
      lo = hi;
    }
  }
  rate_ = model.channel.lambda_e * total;
  t_ = -cfg_.warmup;
  t_end_ = cfg_.duration + model.channel.b;
}

RainSource::RainSource(const SimConfig& cfg, const PowerDistribution& powers, double lambda,
                       const ChannelParams& ch)
    : cfg_(cfg.resolved(ch.b, 0.0)), rng_(splitmix64(cfg.seed)), atoms_(powers.atoms()) {
  ch.validate();
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ValidationError("arrival rate must be finite and >= 0");
  double total = 0.0;
  for (const PowerAtom& a : atoms_) {
    total += a.prob;
    cum_.push_back(total);
  }
  rate_ = lambda;
  t_ = -cfg_.warmup;
  t_end_ = cfg_.duration + ch.b;
}

double RainSource::uniform() {
  // 53 random bits centred in their cell: strictly inside (0, 1).
  return (static_cast<double>(rng_() >> 11) + 0.5) * 0x1.0p-53;
}

void RainSource::sample_mark(PacketEvent& e) {
  const double pick = uniform() * cum_.back();
  const std::size_t i = std::min<std::size_t>(
      std::upper_bound(cum_.begin(), cum_.end(), pick) - cum_.begin(), cum_.size() - 1);
  e.source = static_cast<std::uint32_t>(i);
  const double u_r = uniform();
  const double u_theta = uniform();
  e.h = -std::log(uniform());
  const double u_adm = uniform();
  if (!model_) {
    e.power = atoms_[i].power;
    e.admissible = true;
    return;
  }
  if (model_->density.is_atomic()) {
    const AtomicPoint& p = model_->density.points()[i];
    e.r = p.radius();
    e.theta = std::atan2(p.y, p.x);
  } else {
    const double lo = piece_lo_[i];
    const double hi = piece_hi_[i];
    e.r = std::sqrt(lo * lo + u_r * (hi * hi - lo * lo));
    e.theta = 2.0 * std::numbers::pi * u_theta;
  }
  e.power = model_->channel.p_bar * model_->pathloss.gain(e.r);
  e.admissible = u_adm < policy_(e.r);
}

std::optional<PacketEvent> RainSource::next() {
  if (!(rate_ > 0.0)) return std::nullopt;
  t_ += -std::log(uniform()) / rate_;
  if (t_ >= t_end_) {
    rate_ = 0.0;
    return std::nullopt;
  }
  PacketEvent e;
  e.t = t_;
  sample_mark(e);
  return e;
}

std::vector<PacketEvent> generate_rain(const SimConfig& cfg, const RainModel& model, const Policy& policy) {
  RainSource src(cfg, model, policy);
  std::vector<PacketEvent> out;
  while (auto e = src.next()) out.push_back(*e);
  return out;
}

// --- receiver ---------------------------------------------------------------

AnnulusGrid AnnulusGrid::build(int bins, double outer, const SpatialDensity& density, double lambda_e) {
  if (bins < 1) throw ValidationError("annulus_bins must be at least 1");
  if (!(outer > 0.0)) throw ValidationError("annulus grid radius must be positive");
  AnnulusGrid g;
  for (int k = 0; k <= bins; ++k) g.edges.push_back(outer * k / bins);
  for (int k = 0; k < bins; ++k)
    g.present.push_back(lambda_e > 0.0 && density.annulus_mass(g.edges[k], g.edges[k + 1]) > 0.0);
  return g;
}

std::size_t AnnulusGrid::locate(double r) const {
  if (present.empty() || !(r > 0.0) || r > edges.back()) return size();
  const auto it = std::lower_bound(edges.begin(), edges.end(), r);
  return std::min<std::size_t>(static_cast<std::size_t>(it - edges.begin()) - 1, size() - 1);
}

LossSystem::LossSystem(const SimConfig& cfg, const ChannelParams& ch, AnnulusGrid grid, Sink sink)
    : cfg_(cfg), ch_(ch), grid_(std::move(grid)), sink_(std::move(sink)) {
  const auto k = static_cast<std::size_t>(cfg_.batches);
  batch_adm_.assign(k, 0);
  batch_acc_.assign(k, 0);
  batch_succ_.assign(k, 0);
  bin_arr_.assign(grid_.size(), 0);
  bin_acc_.assign(grid_.size(), 0);
  bin_succ_.assign(grid_.size(), 0);
}

void LossSystem::push(const PacketEvent& in) {
  if (in.t < last_t_) throw ValidationError("events must be pushed in time order");
  last_t_ = in.t;
  const double b = ch_.b;

  if (open_ && in.t >= window_[*open_ - base_].t + b) finalize_open();
  while (!window_.empty() && window_.front().t <= in.t - b) emit_front();

  PacketEvent e = in;
  e.accepted = false;
  e.success = false;
  e.interference_admissible = 0.0;
  e.interference_rejected = 0.0;

  // Ties with the end of a reception find the receiver idle.
  if (e.admissible && e.t >= busy_until_) {
    if (open_) throw NumericError("receiver accepted a packet while busy");
    e.accepted = true;
    if (std::isfinite(busy_until_) && counted(e.t, cfg_)) res_.idle_gap_samples.push_back(e.t - busy_until_);
    busy_until_ = e.t + b;
    for (const PacketEvent& w : window_) {
      const double contrib = w.received() * (b - (e.t - w.t)) / b;
      (w.admissible ? e.interference_admissible : e.interference_rejected) += contrib;
    }
    open_ = base_ + window_.size();
  } else if (open_) {
    PacketEvent& o = window_[*open_ - base_];
    const double contrib = e.received() * (b - (e.t - o.t)) / b;
    (e.admissible ? o.interference_admissible : o.interference_rejected) += contrib;
  }
  window_.push_back(e);
}

void LossSystem::finalize_open() {
  PacketEvent& o = window_[*open_ - base_];
  o.success = o.received() >= ch_.gamma * (ch_.noise_w + o.interference());
  open_.reset();
}

void LossSystem::emit_front() {
  const PacketEvent& e = window_.front();
  account(e);
  if (sink_) sink_(e);
  window_.pop_front();
  ++base_;
}

void LossSystem::account(const PacketEvent& e) {
  if (!counted(e.t, cfg_)) return;
  const auto batch = std::min<std::size_t>(static_cast<std::size_t>(e.t / cfg_.duration * cfg_.batches),
                                           batch_adm_.size() - 1);
  const std::size_t bin = grid_.locate(e.r);
  const bool binned = bin < grid_.size();
  ++res_.packets;
  if (binned) ++bin_arr_[bin];
  if (!e.admissible) return;
  ++res_.admissible;
  ++batch_adm_[batch];
  if (!e.accepted) return;
  ++res_.accepted;
  ++batch_acc_[batch];
  if (binned) ++bin_acc_[bin];
  if (!e.success) return;
  ++res_.successes;
  ++batch_succ_[batch];
  if (binned) ++bin_succ_[bin];
}

SimResult LossSystem::finish() {
  if (open_) finalize_open();
  while (!window_.empty()) emit_front();
  res_.pi_hat = batch_ratio(batch_succ_, batch_adm_);
  res_.p_free_hat = batch_ratio(batch_acc_, batch_adm_);
  res_.rho_hat = annulus_estimates(grid_, bin_arr_, bin_acc_, bin_succ_, cfg_.duration);
  return res_;
}

namespace {

LossSystem::Sink collecting_sink(SimRun& run, const SimConfig& cfg, const SimOptions& opts) {
  return [&run, &cfg, &opts](const PacketEvent& e) {
    if (opts.keep_accepted && e.accepted && counted(e.t, cfg)) run.accepted.push_back(e);
    if (opts.on_event) opts.on_event(e);
  };
}

}  // namespace

SimRun run_loss_system(const std::vector<PacketEvent>& events, const SimConfig& cfg, const ChannelParams& ch,
                       const AnnulusGrid& grid, const SimOptions& opts) {
  ch.validate();
  SimRun run;
  LossSystem sys(cfg, ch, grid, collecting_sink(run, cfg, opts));
  for (const PacketEvent& e : events) sys.push(e);
  run.result = sys.finish();
  return run;
}

SimRun simulate(const SimConfig& cfg, const RainModel& model, const Policy& policy, const SimOptions& opts) {
  RainSource src(cfg, model, policy);
  const SimConfig& c = src.config();
  SimRun run;
  run.lambda = lambda_admissible(model, policy);
  LossSystem sys(c, model.channel,
                 AnnulusGrid::build(c.annulus_bins, c.rho_radius, model.density, model.channel.lambda_e),
                 collecting_sink(run, c, opts));
  while (auto e = src.next()) sys.push(*e);
  run.result = sys.finish();
  return run;
}

SimRun simulate_generic(const SimConfig& cfg, const PowerDistribution& powers, double lambda,
                        const ChannelParams& ch, const SimOptions& opts) {
  RainSource src(cfg, powers, lambda, ch);
  const SimConfig& c = src.config();
  SimRun run;
  run.lambda = lambda;
  LossSystem sys(c, ch, AnnulusGrid::none(), collecting_sink(run, c, opts));
  while (auto e = src.next()) sys.push(*e);
  run.result = sys.finish();
  return run;
}

// --- estimators -------------------------------------------------------------

std::vector<AnnulusEstimate> estimate_rho(const std::vector<PacketEvent>& events, const SimConfig& cfg,
                                          const AnnulusGrid& grid) {
  std::vector<std::size_t> arr(grid.size(), 0), acc(grid.size(), 0), succ(grid.size(), 0);
  for (const PacketEvent& e : events) {
    if (!counted(e.t, cfg)) continue;
    const std::size_t k = grid.locate(e.r);
    if (k == grid.size()) continue;
    ++arr[k];
    if (e.accepted) ++acc[k];
    if (e.success) ++succ[k];
  }
  return annulus_estimates(grid, arr, acc, succ, cfg.duration);
}

Estimate estimate_conditional_laplace(const std::vector<PacketEvent>& accepted, double xi, bool include_rejected) {
  if (!(xi >= 0.0)) throw DomainError("laplace argument must be >= 0");
  Estimate e;
  double sum = 0.0;
  double sum2 = 0.0;
  for (const PacketEvent& p : accepted) {
    if (!p.accepted) continue;
    const double i = include_rejected ? p.interference() : p.interference_admissible;
    const double v = std::exp(-xi * i);
    sum += v;
    sum2 += v * v;
    ++e.n;
  }
  e.low_sample = e.n < 1000;
  if (e.n == 0) return e;
  const double n = static_cast<double>(e.n);
  e.value = sum / n;
  if (e.n > 1) e.se = std::sqrt(std::max(0.0, (sum2 - n * e.value * e.value) / (n - 1.0)) / n);
  return e;
}

GapTest idle_gap_test(std::vector<double> gaps, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("idle gap test needs a positive rate");
  GapTest g;
  g.n = gaps.size();
  if (g.n == 0) return g;
  std::sort(gaps.begin(), gaps.end());
  const double n = static_cast<double>(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    const double f = -std::expm1(-lambda * gaps[i]);
    g.statistic = std::max({g.statistic, (i + 1) / n - f, f - i / n});
  }
  // Kolmogorov distribution: P(sqrt(n) D_n > 1.62762) = 0.01.
  g.critical = 1.62762 / std::sqrt(n);
  g.passed = g.statistic < g.critical;
  return g;
}

std::pair<double, double> brute_force_interference(const std::vector<PacketEvent>& events, std::size_t index,
                                                   double b) {
  const PacketEvent& p = events.at(index);
  double adm = 0.0;
  double rej = 0.0;
  for (std::size_t j = 0; j < events.size(); ++j) {
    if (j == index) continue;
    const double gap = std::abs(events[j].t - p.t);
    if (gap >= b) continue;
    (events[j].admissible ? adm : rej) += events[j].received() * (b - gap) / b;
  }
  return {adm, rej};
}

void write_trace_header(std::ostream& os) { os << "t,r,h,admissible,accepted,interference,success\n"; }

void write_trace_row(std::ostream& os, const PacketEvent& e) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%d,%d,%.17g,%d\n", e.t, e.r, e.h, e.admissible ? 1 : 0,
                e.accepted ? 1 : 0, e.interference(), e.success ? 1 : 0);
  os << buf;
}

}  // namespace erlang_rain
