#pragma once

// Discrete-event simulation of the Poisson rain of packets through a single
// receiver that holds one packet at a time for exactly B seconds.
//
// Arrivals are generated on [-warmup, duration + B) so every packet counted
// in [0, duration) sees its full interference window. Events are processed
// as a stream: the loss system keeps only the packets that can still overlap
// the next arrival, so memory does not grow with the run length.

#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "erlang_rain/loss_model.hpp"

namespace erlang_rain {

struct SimConfig {
  double duration = 10.0;       ///< counted window [0, duration) [s]
  double warmup = 0.0;          ///< discarded lead-in [s]; 0 selects 20 B
  double domain_radius = 0.0;   ///< 0 selects the sensor support radius [m]
  std::uint64_t seed = 1;
  int annulus_bins = 20;
  int batches = 32;             ///< time batches for the batch-means errors
  double rho_radius = 0.0;      ///< outer radius of the annulus grid; 0 selects the domain

  /// Fills the zero defaults and throws ValidationError unless
  /// duration > warmup >= 2B, domain_radius >= support, bins >= 1, batches >= 2.
  SimConfig resolved(double b, double support_radius) const;
};

struct PacketEvent {
  double t = 0.0;
  double r = 0.0;
  double theta = 0.0;
  std::uint32_t source = 0;   ///< atomic point index or power atom index
  double power = 0.0;         ///< mean received power before fading [W]
  double h = 1.0;             ///< fading, Exp(1)
  bool admissible = false;
  bool accepted = false;
  bool success = false;
  /// Time-averaged interference over [t, t+B) from other admissible and
  /// non-admissible packets. Set for accepted packets only.
  double interference_admissible = 0.0;
  double interference_rejected = 0.0;

  double received() const { return power * h; }
  double interference() const { return interference_admissible + interference_rejected; }

  bool operator==(const PacketEvent&) const = default;
};

/// Streaming Poisson rain. Deterministic given the seed.
class RainSource {
 public:
  /// Spatial rain: rate lambda_e per sensor of model.density, admission by
  /// Bernoulli(policy(r)), mean power p_bar L(r).
  RainSource(const SimConfig& cfg, const RainModel& model, const Policy& policy);
  /// Generic rain: total rate lambda, every packet admissible, mean power
  /// drawn from `powers`.
  RainSource(const SimConfig& cfg, const PowerDistribution& powers, double lambda, const ChannelParams& ch);

  std::optional<PacketEvent> next();

  double total_rate() const { return rate_; }
  const SimConfig& config() const { return cfg_; }

 private:
  double uniform();
  void sample_mark(PacketEvent& e);

  SimConfig cfg_;
  std::mt19937_64 rng_;
  double rate_ = 0.0;
  double t_ = 0.0;
  double t_end_ = 0.0;

  // spatial
  std::optional<RainModel> model_;
  Policy policy_;
  std::vector<double> cum_;         // cumulative mass per radial piece or point
  std::vector<double> piece_lo_, piece_hi_;
  // generic
  std::vector<PowerAtom> atoms_;
};

/// Materialized stream, for small runs and tests.
std::vector<PacketEvent> generate_rain(const SimConfig& cfg, const RainModel& model, const Policy& policy);

struct Estimate {
  double value = 0.0;
  double se = 0.0;
  std::size_t n = 0;
  bool low_sample = false;

  bool operator==(const Estimate&) const = default;
};

struct AnnulusEstimate {
  double r_lo = 0.0;
  double r_hi = 0.0;
  bool present = false;          ///< false when no arrivals are expected in the annulus
  std::size_t arrivals = 0;
  std::size_t accepted = 0;
  std::size_t successes = 0;
  double rho = 0.0;              ///< successes / (duration * area) [1/(s m^2)]
  double rho_se = 0.0;
  double p_rec = 0.0;            ///< successes / accepted
  double p_rec_se = 0.0;

  bool operator==(const AnnulusEstimate&) const = default;
};

struct SimResult {
  std::size_t packets = 0;       ///< arrivals in [0, duration)
  std::size_t admissible = 0;
  std::size_t accepted = 0;
  std::size_t successes = 0;
  Estimate pi_hat;               ///< successes / admissible
  Estimate p_free_hat;           ///< accepted / admissible
  std::vector<AnnulusEstimate> rho_hat;
  std::vector<double> idle_gap_samples;  ///< T(0) at accepted arrivals

  bool operator==(const SimResult&) const = default;
};

/// Equal-width annuli over [0, outer], each (lo, hi]. An annulus is absent
/// when no arrivals are expected in it (zero sensor mass or lambda_e = 0).
struct AnnulusGrid {
  std::vector<double> edges;
  std::vector<bool> present;

  static AnnulusGrid none() { return {}; }
  static AnnulusGrid build(int bins, double outer, const SpatialDensity& density, double lambda_e);

  std::size_t size() const { return present.size(); }
  /// Index of the annulus containing r, or size() when r is outside.
  std::size_t locate(double r) const;
};

/// Single-pass receiver state machine. Push events in time order; each event
/// is handed to the sink in time order once its flags are final.
class LossSystem {
 public:
  using Sink = std::function<void(const PacketEvent&)>;

  LossSystem(const SimConfig& cfg, const ChannelParams& ch, AnnulusGrid grid, Sink sink = {});

  void push(const PacketEvent& e);
  /// Flushes the pending events and computes the estimates.
  SimResult finish();

 private:
  void finalize_open();
  void emit_front();
  void account(const PacketEvent& e);

  SimConfig cfg_;
  ChannelParams ch_;
  AnnulusGrid grid_;
  Sink sink_;

  std::deque<PacketEvent> window_;    // events with t > now - B, plus the open packet
  std::size_t base_ = 0;              // absolute index of window_.front()
  std::optional<std::size_t> open_;   // absolute index of the packet in reception
  double busy_until_ = -std::numeric_limits<double>::infinity();
  double last_t_ = -std::numeric_limits<double>::infinity();

  std::vector<std::size_t> batch_adm_, batch_acc_, batch_succ_;
  std::vector<std::size_t> bin_arr_, bin_acc_, bin_succ_;
  SimResult res_;
};

struct SimOptions {
  bool keep_accepted = true;            ///< retain counted accepted packets
  std::function<void(const PacketEvent&)> on_event;  ///< every event, time order
};

struct SimRun {
  SimResult result;
  std::vector<PacketEvent> accepted;    ///< counted accepted packets, time order
  double lambda = 0.0;                  ///< admissible intensity; 0 from run_loss_system
};

/// Runs `events` (time order) through the receiver.
SimRun run_loss_system(const std::vector<PacketEvent>& events, const SimConfig& cfg, const ChannelParams& ch,
                       const AnnulusGrid& grid = AnnulusGrid::none(), const SimOptions& opts = {});

SimRun simulate(const SimConfig& cfg, const RainModel& model, const Policy& policy, const SimOptions& opts = {});
SimRun simulate_generic(const SimConfig& cfg, const PowerDistribution& powers, double lambda,
                        const ChannelParams& ch, const SimOptions& opts = {});

/// Per-annulus received-packet rate from a processed event list.
std::vector<AnnulusEstimate> estimate_rho(const std::vector<PacketEvent>& events, const SimConfig& cfg,
                                          const AnnulusGrid& grid);

/// Mean of exp(-xi I) over accepted packets, I excluding the packet's own
/// power. With include_rejected the non-admissible interferers are added.
Estimate estimate_conditional_laplace(const std::vector<PacketEvent>& accepted, double xi,
                                      bool include_rejected = false);

struct GapTest {
  double statistic = 0.0;   ///< Kolmogorov sup-distance D_n
  double critical = 0.0;    ///< asymptotic 1% critical value of D_n
  std::size_t n = 0;
  bool passed = false;
};

/// Kolmogorov-Smirnov distance between the idle gaps and Exp(lambda).
GapTest idle_gap_test(std::vector<double> gaps, double lambda);

/// Recomputes the interference of packet `index` by scanning all events.
/// Returns {admissible part, rejected part}.
std::pair<double, double> brute_force_interference(const std::vector<PacketEvent>& events, std::size_t index,
                                                   double b);

/// CSV header `t,r,h,admissible,accepted,interference,success`.
void write_trace_header(std::ostream& os);
void write_trace_row(std::ostream& os, const PacketEvent& e);

}  // namespace erlang_rain
