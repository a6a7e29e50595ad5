#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "erlang_rain/sim.hpp"

using namespace erlang_rain;

namespace {

// Small spatial scenario: every quantity of interest moves within a few seconds of simulated time.
RainModel small_model(double lambda_e = 0.5) {
  RainModel m;
  m.pathloss = PathLoss(1.0, 3.0);
  m.density = SpatialDensity::uniform(1.0, 10.0);
  m.channel.p_bar = 1.0;
  m.channel.noise_w = 1e-4;
  m.channel.gamma = 1.0;
  m.channel.b = 5e-3;
  m.channel.lambda_e = lambda_e;
  return m;
}

ChannelParams generic_channel(double b) {
  ChannelParams ch;
  ch.p_bar = 1.0;
  ch.noise_w = 0.1;
  ch.gamma = 1.0;
  ch.b = b;
  return ch;
}

std::vector<PacketEvent> all_events(const SimConfig& cfg, const RainModel& model, const Policy& policy,
                                    SimRun* run = nullptr) {
  std::vector<PacketEvent> out;
  SimOptions opts;
  opts.on_event = [&](const PacketEvent& e) { out.push_back(e); };
  SimRun r = simulate(cfg, model, policy, opts);
  if (run) *run = std::move(r);
  return out;
}

PacketEvent packet(double t, double power, double h = 1.0, bool admissible = true) {
  PacketEvent e;
  e.t = t;
  e.power = power;
  e.h = h;
  e.admissible = admissible;
  return e;
}

}  // namespace

TEST_CASE("configuration defaults and invariants") {
  SimConfig c;
  c.duration = 1.0;
  const SimConfig r = c.resolved(1e-3, 200.0);
  CHECK(r.warmup == doctest::Approx(0.02));
  CHECK(r.domain_radius == 200.0);
  CHECK(r.rho_radius == 200.0);
  c.warmup = 1e-3;
  CHECK_THROWS_AS(c.resolved(1e-3, 200.0), ValidationError);
  c.warmup = 2.0;
  CHECK_THROWS_AS(c.resolved(1e-3, 200.0), ValidationError);
  c.warmup = 0.0;
  c.domain_radius = 100.0;
  CHECK_THROWS_AS(c.resolved(1e-3, 200.0), ValidationError);
  c.domain_radius = 0.0;
  c.annulus_bins = 0;
  CHECK_THROWS_AS(c.resolved(1e-3, 200.0), ValidationError);
}

TEST_CASE("rain generation") {
  SimConfig cfg;
  cfg.duration = 20.0;
  cfg.seed = 7;

  CHECK(generate_rain(cfg, small_model(0.0), Policy::admit_all()).empty());

  const RainModel m = small_model(0.5);
  const std::vector<PacketEvent> ev = generate_rain(cfg, m, Policy::indicator(5.0));
  const double span = cfg.duration + 20.0 * m.channel.b + m.channel.b;
  const double expected = 0.5 * 100.0 * std::numbers::pi * span;
  CHECK(std::abs(static_cast<double>(ev.size()) - expected) < 4.0 * std::sqrt(expected));
  CHECK(std::is_sorted(ev.begin(), ev.end(), [](const auto& a, const auto& b) { return a.t < b.t; }));
  CHECK(ev.front().t >= -20.0 * m.channel.b);
  std::size_t inner = 0;
  for (const PacketEvent& e : ev) {
    CHECK(e.r > 0.0);
    CHECK(e.r <= 10.0);
    CHECK(e.h > 0.0);
    CHECK(e.admissible == (e.r <= 5.0));
    inner += e.r <= 5.0;
  }
  // A quarter of a uniform disk lies within half its radius.
  const double n = static_cast<double>(ev.size());
  CHECK(std::abs(inner / n - 0.25) < 4.0 * std::sqrt(0.25 * 0.75 / n));

  for (const PacketEvent& e : generate_rain(cfg, m, Policy::admit_none())) CHECK_FALSE(e.admissible);
}

TEST_CASE("atomic rain keeps point identities") {
  RainModel m = small_model(2.0);
  m.density = SpatialDensity::atomic({{3.0, 4.0, 1.0}, {0.0, -2.0, 3.0}});
  SimConfig cfg;
  cfg.duration = 50.0;
  std::size_t second = 0;
  const std::vector<PacketEvent> ev = generate_rain(cfg, m, Policy::admit_all());
  for (const PacketEvent& e : ev) {
    if (e.source == 0) {
      CHECK(e.r == doctest::Approx(5.0));
    } else {
      CHECK(e.r == doctest::Approx(2.0));
      CHECK(e.theta == doctest::Approx(-std::numbers::pi / 2));
      ++second;
    }
  }
  const double n = static_cast<double>(ev.size());
  CHECK(std::abs(second / n - 0.75) < 4.0 * std::sqrt(0.75 * 0.25 / n));
}

TEST_CASE("single sensor without noise decodes every accepted packet") {
  RainModel m = small_model(0.2);
  m.density = SpatialDensity::atomic({{1.0, 1.0, 1.0}});
  m.channel.noise_w = 0.0;
  SimConfig cfg;
  cfg.duration = 2000.0;
  const SimRun run = simulate(cfg, m, Policy::admit_all());
  CHECK(run.result.accepted > 300);
  CHECK(run.result.successes == run.result.accepted);
}

TEST_CASE("constructed collision") {
  ChannelParams ch = generic_channel(1.0);
  ch.noise_w = 0.0;
  SimConfig cfg;
  cfg.duration = 10.0;
  cfg.warmup = 2.0;
  // The second packet starts 1e-3 B later with 1% more fading gain: it
  // overlaps almost the whole reception at slightly more than the first's power.
  const std::vector<PacketEvent> ev{packet(1.0, 5.0, 1.0), packet(1.001, 5.0, 1.01)};
  std::vector<PacketEvent> out;
  SimOptions opts;
  opts.on_event = [&](const PacketEvent& e) { out.push_back(e); };
  run_loss_system(ev, cfg, ch, AnnulusGrid::none(), opts);
  REQUIRE(out.size() == 2);
  CHECK(out[0].accepted);
  CHECK_FALSE(out[0].success);
  CHECK(out[0].interference_admissible == doctest::Approx(5.0 * 1.01 * 0.999).epsilon(1e-14));
  CHECK_FALSE(out[1].accepted);
  CHECK_FALSE(out[1].success);

  // Arriving exactly when the reception ends finds the receiver idle.
  const std::vector<PacketEvent> tie{packet(1.0, 5.0), packet(2.0, 5.0)};
  const SimRun r = run_loss_system(tie, cfg, ch);
  CHECK(r.result.accepted == 2);
  CHECK(r.result.successes == 2);
  REQUIRE(r.result.idle_gap_samples.size() == 1);
  CHECK(r.result.idle_gap_samples[0] == 0.0);

  // Non-admissible packets interfere but are never accepted.
  const std::vector<PacketEvent> mixed{packet(1.0, 1.0, 1.0, false), packet(1.5, 1.0), packet(3.0, 1.0, 1.0, false)};
  out.clear();
  run_loss_system(mixed, cfg, ch, AnnulusGrid::none(), opts);
  CHECK_FALSE(out[0].accepted);
  CHECK(out[1].accepted);
  CHECK(out[1].interference_rejected == doctest::Approx(0.5));
  CHECK(out[1].interference_admissible == 0.0);
  CHECK_FALSE(out[2].accepted);

  const std::vector<PacketEvent> unsorted{packet(2.0, 1.0), packet(1.0, 1.0)};
  CHECK_THROWS_AS(run_loss_system(unsorted, cfg, ch), ValidationError);
}

TEST_CASE("streaming interference agrees with brute force") {
  const RainModel m = small_model(2.0);
  SimConfig cfg;
  cfg.duration = 15.0;
  cfg.seed = 11;
  const std::vector<PacketEvent> ev = all_events(cfg, m, Policy::indicator(6.0));
  std::vector<std::size_t> acc;
  for (std::size_t i = 0; i < ev.size(); ++i)
    if (ev[i].accepted) acc.push_back(i);
  REQUIRE(acc.size() > 1000);
  std::mt19937_64 pick(3);
  std::shuffle(acc.begin(), acc.end(), pick);
  acc.resize(1000);
  double worst = 0.0;
  for (std::size_t i : acc) {
    const auto [adm, rej] = brute_force_interference(ev, i, m.channel.b);
    worst = std::max(worst, std::abs(adm - ev[i].interference_admissible) / std::max(adm, 1e-300));
    worst = std::max(worst, std::abs(rej - ev[i].interference_rejected) / std::max(rej, 1e-300));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("receiver exclusivity and collision symmetry") {
  const RainModel m = small_model(2.0);
  SimConfig cfg;
  cfg.duration = 4.0;
  const std::vector<PacketEvent> ev = all_events(cfg, m, Policy::admit_all());
  const double b = m.channel.b;
  double busy_until = -1e300;
  std::size_t lost = 0;
  for (const PacketEvent& e : ev) {
    CHECK((!e.accepted || e.admissible));
    CHECK((!e.success || e.accepted));
    if (e.accepted) {
      CHECK(e.t >= busy_until);
      busy_until = e.t + b;
    } else if (e.admissible) {
      CHECK(e.t < busy_until);
      ++lost;
    }
  }
  CHECK(lost > 100);
}

TEST_CASE("acceptance fraction follows the Erlang loss formula") {
  const PowerDistribution one({{1.0, 1.0}});
  for (double lb : {0.1, 1.0, 5.0}) {
    SimConfig cfg;
    cfg.duration = 3000.0;
    cfg.seed = 5;
    const double b = 1e-2;
    const SimRun run = simulate_generic(cfg, one, lb / b, generic_channel(b));
    const Estimate& pf = run.result.p_free_hat;
    CHECK(pf.n > 20000);
    CHECK(std::abs(pf.value - 1.0 / (1.0 + lb)) < 3.0 * pf.se);
    CHECK(pf.se < 0.01);
  }
}

TEST_CASE("generic reception frequency matches the closed form") {
  const PowerDistribution two({{2.0, 0.3}, {0.5, 0.7}});
  const ChannelParams ch = generic_channel(1e-3);
  SimConfig cfg;
  cfg.duration = 10000.0;
  cfg.seed = 21;
  SimOptions opts;
  opts.keep_accepted = false;
  const SimRun run = simulate_generic(cfg, two, 100.0, ch, opts);
  CHECK(run.result.admissible > 900000);
  const double pi = erlang_pi(two, 100.0, ch);
  CHECK(std::abs(run.result.pi_hat.value - pi) < 3.0 * run.result.pi_hat.se);
  CHECK(run.result.pi_hat.value <= run.result.p_free_hat.value);
}

TEST_CASE("conditional interference transform") {
  const PowerDistribution two({{2.0, 0.3}, {0.5, 0.7}});
  const ChannelParams ch = generic_channel(1e-2);
  SimConfig cfg;
  cfg.duration = 400.0;
  cfg.seed = 2;
  const SimRun run = simulate_generic(cfg, two, 50.0, ch);
  CHECK(estimate_conditional_laplace(run.accepted, 0.0).value == 1.0);
  CHECK(estimate_conditional_laplace(run.accepted, 0.0).se == 0.0);
  for (double xi : {0.1, 1.0, 10.0}) {
    const Estimate e = estimate_conditional_laplace(run.accepted, xi);
    CHECK_FALSE(e.low_sample);
    const double exact = laplace_L1_generic(two, 50.0, ch.b, xi) * laplace_L2_generic(two, 50.0, ch.b, xi);
    CHECK(std::abs(e.value - exact) < 3.0 * e.se);
  }
  const std::vector<PacketEvent> few(run.accepted.begin(), run.accepted.begin() + 10);
  CHECK(estimate_conditional_laplace(few, 1.0).low_sample);

  // A lone far sensor never sees an interferer.
  RainModel m = small_model(0.01);
  m.density = SpatialDensity::atomic({{8.0, 0.0, 1.0}});
  SimConfig quiet;
  quiet.duration = 5000.0;
  const SimRun lone = simulate(quiet, m, Policy::admit_all());
  CHECK(estimate_conditional_laplace(lone.accepted, 5.0).value == 1.0);
}

TEST_CASE("idle gaps are exponential and the test rejects periodic arrivals") {
  const PowerDistribution one({{1.0, 1.0}});
  SimConfig cfg;
  cfg.duration = 200.0;
  cfg.seed = 9;
  const SimRun run = simulate_generic(cfg, one, 100.0, generic_channel(1e-2));
  const GapTest g = idle_gap_test(run.result.idle_gap_samples, 100.0);
  CHECK(g.n > 5000);
  CHECK(g.passed);

  const ChannelParams ch = generic_channel(1e-2);
  std::vector<PacketEvent> periodic;
  for (int k = -10; k < 20000; ++k) periodic.push_back(packet(k * 0.01, 1.0));
  SimConfig pcfg;
  pcfg.duration = 199.0;
  pcfg.warmup = 0.2;
  const SimRun p = run_loss_system(periodic, pcfg, ch);
  const GapTest bad = idle_gap_test(p.result.idle_gap_samples, 100.0);
  CHECK(bad.n > 5000);
  CHECK_FALSE(bad.passed);
  CHECK(bad.statistic > 10.0 * bad.critical);
}

TEST_CASE("annulus estimates") {
  const RainModel m = small_model(1.0);
  SimConfig cfg;
  cfg.duration = 20.0;
  cfg.annulus_bins = 8;
  SimRun run;
  const std::vector<PacketEvent> ev = all_events(cfg, m, Policy::admit_all(), &run);
  const SimConfig c = cfg.resolved(m.channel.b, 10.0);
  double total = 0.0;
  for (const AnnulusEstimate& a : run.result.rho_hat) {
    CHECK(a.present);
    total += a.rho * c.duration * std::numbers::pi * (a.r_hi * a.r_hi - a.r_lo * a.r_lo);
  }
  CHECK(total == doctest::Approx(static_cast<double>(run.result.successes)).epsilon(1e-12));
  const AnnulusGrid grid = AnnulusGrid::build(8, 10.0, m.density, 1.0);
  CHECK(estimate_rho(ev, c, grid) == run.result.rho_hat);

  // Annuli beyond the support expect no arrivals and are reported absent.
  RainModel ring = m;
  ring.density = SpatialDensity::radial(RadialProfile({2.0, 10.0}, {0.0, 1.0}));
  cfg.annulus_bins = 5;
  const SimRun r2 = simulate(cfg, ring, Policy::admit_all());
  CHECK_FALSE(r2.result.rho_hat[0].present);
  CHECK(r2.result.rho_hat[1].present);

  // Noise far above every signal: nothing is decoded.
  RainModel loud = m;
  loud.channel.noise_w = 1e6;
  const SimRun r3 = simulate(cfg, loud, Policy::admit_all());
  CHECK(r3.result.successes == 0);
  for (const AnnulusEstimate& a : r3.result.rho_hat) {
    CHECK(a.rho == 0.0);
    CHECK(a.p_rec == 0.0);
  }
}

TEST_CASE("spatial reception per annulus matches the closed form") {
  const RainModel m = small_model(1.0);
  const Policy pol = Policy::indicator(8.0);
  SimConfig cfg;
  cfg.duration = 60.0;
  cfg.annulus_bins = 5;
  cfg.rho_radius = 8.0;
  cfg.seed = 4;
  const SimRun run = simulate(cfg, m, pol);
  for (const AnnulusEstimate& a : run.result.rho_hat) {
    REQUIRE(a.accepted >= 200);
    // Accepted packets are spread over the annulus with density proportional to r.
    double num = 0.0;
    double den = 0.0;
    const int n = 64;
    for (int i = 0; i < n; ++i) {
      const double r = a.r_lo + (a.r_hi - a.r_lo) * (i + 0.5) / n;
      num += r * p_rec(m, pol, r);
      den += r;
    }
    CHECK(std::abs(a.p_rec - num / den) < 3.0 * a.p_rec_se);
  }
}

TEST_CASE("identical seeds reproduce the run bit for bit") {
  const RainModel m = small_model(1.0);
  SimConfig cfg;
  cfg.duration = 5.0;
  cfg.seed = 123;
  const SimRun a = simulate(cfg, m, Policy::indicator(7.0));
  const SimRun b = simulate(cfg, m, Policy::indicator(7.0));
  CHECK(a.result == b.result);
  CHECK(a.accepted == b.accepted);
  cfg.seed = 124;
  const SimRun c = simulate(cfg, m, Policy::indicator(7.0));
  CHECK_FALSE(a.result == c.result);
}

TEST_CASE("trace rows") {
  std::ostringstream os;
  write_trace_header(os);
  PacketEvent e = packet(0.1, 2.0, 0.5);
  e.r = 3.0;
  e.accepted = true;
  e.interference_admissible = 0.25;
  write_trace_row(os, e);
  CHECK(os.str() ==
        "t,r,h,admissible,accepted,interference,success\n"
        "0.10000000000000001,3,0.5,1,1,0.25,0\n");
}
