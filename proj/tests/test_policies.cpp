#include <cmath>
#include <random>

#include "doctest.h"
#include "erlang_rain/policies.hpp"

using namespace erlang_rain;

namespace {

RainModel canonical_model(double support = 200.0) {
  RainModel m;
  m.pathloss = PathLoss(std::pow(10.0, -5.5), 3.3);
  m.density = SpatialDensity::uniform(10.0, support);
  m.channel.p_bar = 1e-3;
  m.channel.noise_w = 1e-16;
  m.channel.gamma = 1.0;
  m.channel.b = 1e-3;
  m.channel.lambda_e = 0.125;
  return m;
}

// Lower-bound information density under a policy, computed independently of
// the solver: lambda_e lambda_s d p_free p_lower.
double rho_lower(const RainModel& m, const Policy& d, double r) {
  const double pf = p_free(lambda_admissible(m, d), m.channel.b);
  return m.channel.lambda_e * m.density.intensity_at(r) * d(r) * pf * p_rec_bound(m, r, BoundKind::lower);
}

}  // namespace

TEST_CASE("naive policy") {
  const RainModel m = canonical_model();
  const double r0 = naive_radius(m.pathloss, m.channel);
  CHECK(r0 == doctest::Approx(187.381742286038405).epsilon(1e-12));
  const Policy d = naive_policy(m.pathloss, m.channel);
  CHECK(d(r0) == 1.0);
  CHECK(d(std::nextafter(r0, 1e9)) == 0.0);

  ChannelParams ch = m.channel;
  ch.gamma = 2.0;
  CHECK(naive_radius(m.pathloss, ch) == doctest::Approx(r0 * std::pow(2.0, -1.0 / 3.3)).epsilon(1e-13));
  ch.noise_w = 0.0;
  CHECK_THROWS_WITH_AS(naive_radius(m.pathloss, ch), "naive radius undefined", DomainError);
}

TEST_CASE("max-min policy on a uniform disk") {
  const RainModel m = canonical_model(20.0);
  const WeightFunction w = WeightFunction::constant(0.75);
  const MaxMinSolution s = maxmin_policy(w, 20.0, m, BoundKind::lower);

  CHECK(s.argmax_radius == 20.0);
  CHECK(s.policy(20.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.policy(20.5) == 0.0);
  CHECK(s.level == doctest::Approx(1.0 / (m.channel.b * s.i_const + s.m_const / m.channel.lambda_e)).epsilon(1e-15));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.01, 20.0);
  double dmax = 0.0;
  double first = -1.0;
  for (int k = 0; k < 200; ++k) {
    const double r = u(rng);
    const double d = s.policy(r);
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);
    dmax = std::max(dmax, d);
    const double ratio = rho_lower(m, s.policy, r) / w(r);
    if (first < 0.0) first = ratio;
    CHECK(ratio == doctest::Approx(first).epsilon(1e-6));
    CHECK(s.rho_achieved(r) == doctest::Approx(ratio * w(r)).epsilon(1e-6));
  }
  CHECK(dmax <= 1.0);
}

TEST_CASE("max-min guarantee holds under the exact model") {
  const RainModel m = canonical_model(20.0);
  const MaxMinSolution s = maxmin_policy(WeightFunction::constant(1.0), 20.0, m, BoundKind::lower);
  const double lambda = lambda_admissible(m, s.policy);
  const double pf = p_free(lambda, m.channel.b);
  for (int k = 1; k <= 50; ++k) {
    const double r = 20.0 * k / 50.0;
    const double exact =
        m.channel.lambda_e * 10.0 * s.policy(r) * pf * detail::p_rec_given_lambda(m, s.policy, r, lambda);
    CAPTURE(r);
    CHECK(exact >= s.rho_achieved(r) * (1 - 1e-9));
  }
}

TEST_CASE("max-min policy with piecewise density and weights") {
  RainModel m = canonical_model();
  m.density = SpatialDensity::radial(RadialProfile({6.0, 15.0}, {4.0, 12.0}));
  const WeightFunction w(RadialProfile({10.0, 15.0}, {1.0, 2.0}));
  const MaxMinSolution s = maxmin_policy(w, 15.0, m, BoundKind::upper);
  double dmax = 0.0;
  for (int k = 1; k <= 1500; ++k) dmax = std::max(dmax, s.policy(15.0 * k / 1500.0));
  dmax = std::max(dmax, s.policy(s.argmax_radius));
  CHECK(dmax == doctest::Approx(1.0).epsilon(1e-9));
  const double lambda = lambda_admissible(m, s.policy);
  const double pf = p_free(lambda, m.channel.b);
  for (double r : {0.5, 5.9, 6.0, 6.1, 9.99, 10.0, 10.01, 14.0, 15.0}) {
    const double up = m.channel.lambda_e * m.density.intensity_at(r) * s.policy(r) * pf *
                      p_rec_bound(m, r, BoundKind::upper);
    CAPTURE(r);
    CHECK(up / w(r) == doctest::Approx(s.level).epsilon(1e-6));
  }
}

TEST_CASE("max-min policy existence") {
  const RainModel m = canonical_model(10.0);
  CHECK_THROWS_WITH_AS(maxmin_policy(WeightFunction::constant(1.0), 20.0, m, BoundKind::lower),
                       "max-min policy does not exist", InfeasibleError);
  RainModel hole = canonical_model();
  hole.density = SpatialDensity::radial(RadialProfile({5.0, 8.0, 30.0}, {1.0, 0.0, 1.0}));
  CHECK_THROWS_AS(maxmin_policy(WeightFunction::constant(1.0), 20.0, hole, BoundKind::lower), InfeasibleError);
  CHECK(maxmin_level(30.0, canonical_model(10.0), BoundKind::lower) == 0.0);
}

TEST_CASE("max-min level vanishes linearly with the emission rate") {
  RainModel m = canonical_model(20.0);
  m.channel.lambda_e = 1e-9;
  const double a = maxmin_level(20.0, m, BoundKind::lower);
  m.channel.lambda_e = 2e-9;
  const double b = maxmin_level(20.0, m, BoundKind::lower);
  CHECK(b / a == doctest::Approx(2.0).epsilon(1e-6));
  m.channel.lambda_e = 1e-10;
  CHECK(maxmin_level(20.0, m, BoundKind::lower) < a);
}

TEST_CASE("max-min radius") {
  const RainModel m = canonical_model();
  SUBCASE("canonical target against an independent solver") {
    const double rl = maxmin_max_radius(0.75, m, BoundKind::lower);
    const double ru = maxmin_max_radius(0.75, m, BoundKind::upper);
    CHECK(rl == doctest::Approx(8.101408208774).epsilon(1e-8));
    CHECK(ru == doctest::Approx(9.701012648836).epsilon(1e-8));
    // Grid scan at 0.01 m around the root.
    CHECK(maxmin_level(rl - 0.01, m, BoundKind::lower) >= 0.75);
    CHECK(maxmin_level(rl + 0.01, m, BoundKind::lower) < 0.75);
    CHECK(maxmin_level(5.0, m, BoundKind::lower) == doctest::Approx(1.01784584968391).epsilon(1e-8));
    CHECK(maxmin_level(5.0, m, BoundKind::upper) == doctest::Approx(1.07639641407294).epsilon(1e-8));
  }
  SUBCASE("monotone in the target") {
    const double r1 = maxmin_max_radius(0.75, m, BoundKind::lower);
    const double r2 = maxmin_max_radius(0.375, m, BoundKind::lower);
    CHECK(r2 > r1);
  }
  SUBCASE("feasibility edge") {
    SolverOptions opts;
    const double top = maxmin_level(opts.r_min, m, BoundKind::lower);
    CHECK(maxmin_max_radius(top * (1 - 1e-9), m, BoundKind::lower) == doctest::Approx(opts.r_min).epsilon(1e-6));
    CHECK_THROWS_WITH_AS(maxmin_max_radius(top * 1.01, m, BoundKind::lower),
                         "target density unreachable at any radius", InfeasibleError);
  }
}

TEST_CASE("coverage-optimal disk") {
  const RainModel m = canonical_model();
  const CodSolution c = cod_policy(0.75, m);
  CHECK(c.radius == doctest::Approx(9.237467152527).epsilon(1e-8));
  CHECK(cod_edge_density(c.radius, m) == doctest::Approx(0.75).epsilon(1e-6));
  CHECK(c.policy(c.radius) == 1.0);

  const RainModel small = canonical_model(30.0);
  CHECK(cod_policy(1e-9, small).radius == 30.0);
  CHECK_THROWS_AS(cod_policy(100.0, m), InfeasibleError);
}

TEST_CASE("water-filling on the canonical profile") {
  const RainModel m = canonical_model();
  const WeightFunction w = WeightFunction::constant(0.75);
  const WaterfillSolution s = waterfill_policy(w, 200.0, m, BoundKind::lower);
  REQUIRE(s.monotone);
  REQUIRE(s.region.size() == 1);
  CHECK(s.region.front().first == 0.0);
  CHECK(s.outer_radius() == doctest::Approx(12.9812639154).epsilon(1e-7));
  CHECK(s.u_star == doctest::Approx(195.65663697775 / 0.75).epsilon(1e-8));
  CHECK(s.theta_star == doctest::Approx(p_rec_bound(m, s.outer_radius(), BoundKind::lower) / 0.75));
  CHECK(s.theta_star == doctest::Approx(m.channel.b * s.u_star).epsilon(1e-6));

  // Brute-force scan of U(R).
  double best = 0.0;
  for (double r = 10.0; r <= 16.0; r += 0.05) best = std::max(best, waterfill_objective({{0.0, r}}, w, m, BoundKind::lower));
  CHECK(s.u_star >= best);
  CHECK(s.u_star <= best * (1 + 1e-4));

  const Throughput t = total_throughput(s.policy(), w, 200.0, m);
  CHECK(t.lower == doctest::Approx(s.u_star).epsilon(1e-8));
  CHECK(t.exact >= t.lower);
  CHECK(t.upper >= t.exact);

  const double r_cod = cod_policy(0.75, m).radius;
  CHECK(s.outer_radius() > r_cod);
}

TEST_CASE("water-filling without collisions admits the whole domain") {
  RainModel m = canonical_model(50.0);
  m.channel.b = 1e-12;
  const WaterfillSolution s = waterfill_policy(WeightFunction::constant(1.0), 50.0, m, BoundKind::lower);
  CHECK(s.outer_radius() == doctest::Approx(50.0).epsilon(1e-6));
}

TEST_CASE("water-filling thresholds reception per sensor, not per area") {
  // A sparse inner disk still beats the interference it adds, so it is admitted.
  RainModel m = canonical_model();
  m.density = SpatialDensity::radial(RadialProfile({5.0, 40.0}, {0.5, 20.0}));
  const WeightFunction w = WeightFunction::constant(1.0);
  const WaterfillSolution s = waterfill_policy(w, 40.0, m, BoundKind::lower);
  CHECK(s.monotone);
  REQUIRE(s.region.size() == 1);
  CHECK(s.region.front().first == 0.0);
  CHECK(s.theta_star == doctest::Approx(m.channel.b * s.u_star).epsilon(1e-6));
  for (double r = 1.0; r <= 40.0; r += 0.5) {
    CHECK(waterfill_objective({{0.0, r}}, w, m, BoundKind::lower) <= s.u_star * (1 + 1e-12));
    CHECK(waterfill_objective({{5.0, std::max(5.0, r) + 1e-9}}, w, m, BoundKind::lower) <= s.u_star);
  }
}

TEST_CASE("water-filling with a non-monotone score") {
  RainModel m = canonical_model();
  // Heavier weights near the receiver make p / D rise across 4 m.
  const WeightFunction w(RadialProfile({4.0, 40.0}, {20.0, 1.0}));
  SolverOptions opts;
  opts.waterfill_cells = 1024;
  opts.waterfill_quantiles = 512;
  const WaterfillSolution s = waterfill_policy(w, 40.0, m, BoundKind::lower, opts);
  CHECK_FALSE(s.monotone);
  REQUIRE_FALSE(s.region.empty());
  const Policy d = s.policy();
  for (double r = 0.02; r < 40.0; r += 0.1) {
    const double ratio = p_rec_bound(m, r, BoundKind::lower) / w(r);
    if (d(r) > 0.0) {
      CHECK(ratio > s.theta_star * (1 - 1e-9));
    } else {
      CHECK(ratio <= s.theta_star * (1 + 1e-9));
    }
  }
  CHECK(s.u_star == doctest::Approx(waterfill_objective(s.region, w, m, BoundKind::lower)).epsilon(1e-12));
  CHECK(s.theta_star == doctest::Approx(m.channel.b * s.u_star).epsilon(2e-2));
  for (double r = 1.0; r <= 40.0; r += 1.0) {
    CHECK(waterfill_objective({{0.0, r}}, w, m, BoundKind::lower) <= s.u_star * (1 + 1e-6));
    CHECK(waterfill_objective({{4.0, std::max(4.5, r)}}, w, m, BoundKind::lower) <= s.u_star * (1 + 1e-6));
  }
}

TEST_CASE("total throughput") {
  const RainModel m = canonical_model(50.0);
  const WeightFunction w = WeightFunction::constant(0.5);
  const Throughput none = total_throughput(Policy::admit_none(), w, 50.0, m);
  CHECK(none.exact == 0.0);
  CHECK(none.lower == 0.0);
  for (const Policy& d : {Policy::indicator(15.0), Policy::constant(0.4), Policy::annuli({{3.0, 9.0}, {20.0, 30.0}})}) {
    const Throughput t = total_throughput(d, w, 50.0, m);
    CHECK(t.lower <= t.exact * (1 + 1e-9));
    CHECK(t.exact <= t.upper * (1 + 1e-9));
  }
}

TEST_CASE("bound kind names") {
  CHECK(bound_kind_from_string("lower") == BoundKind::lower);
  CHECK(std::string(to_string(BoundKind::upper)) == "upper");
  CHECK_THROWS_AS(bound_kind_from_string("middle"), ValidationError);
}
