#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "erlang_rain/geometry.hpp"

using namespace erlang_rain;

namespace {

const double kKappa = std::pow(10.0, -5.5);
constexpr double kEta = 3.3;

// Composite trapezoid with n panels; the brute-force oracle for radial integrals.
template <class F>
double trapezoid(F&& f, double a, double b, long n) {
  const double h = (b - a) / n;
  double s = 0.5 * (f(a) + f(b));
  for (long i = 1; i < n; ++i) s += f(a + i * h);
  return s * h;
}

}  // namespace

TEST_CASE("path loss validates its parameters") {
  CHECK_THROWS_AS(PathLoss(0.0, 3.0), ValidationError);
  CHECK_THROWS_AS(PathLoss(1.0, 2.0), ValidationError);
  CHECK_THROWS_AS(PathLoss(1.0, 1.5), ValidationError);
  CHECK_NOTHROW(PathLoss(1.0, 2.0001));
}

TEST_CASE("attenuation") {
  const PathLoss canonical(kKappa, kEta);
  CHECK(attenuation(canonical, 1.0) == doctest::Approx(3.1622776601683795e-6).epsilon(1e-14));
  CHECK(attenuation(PathLoss(1.0, 2.5), 1.0) == 1.0);
  // 30-digit reference value of 10^-5.5 * 20^-3.3
  CHECK(attenuation(canonical, 20.0) == doctest::Approx(1.60916661693152977e-10).epsilon(1e-13));
  CHECK_THROWS_AS(attenuation(canonical, 0.0), DomainError);
  CHECK_THROWS_AS(attenuation(canonical, -1.0), DomainError);
  CHECK(canonical.inverse(canonical.gain(37.0)) == doctest::Approx(37.0).epsilon(1e-13));
}

TEST_CASE("attenuation is strictly decreasing") {
  const PathLoss pl(kKappa, kEta);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(1e-3, 500.0);
  for (int i = 0; i < 1000; ++i) {
    double a = u(rng), b = u(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    CHECK(attenuation(pl, a) > attenuation(pl, b));
  }
}

TEST_CASE("phi kernel") {
  CHECK(phi(0.0) == 0.0);
  CHECK(phi(1.0) == doctest::Approx(0.306852819440054690).epsilon(1e-14));
  CHECK(phi(1e-6) == doctest::Approx(4.99999666666916666e-7).epsilon(1e-12));
  CHECK(phi(std::numeric_limits<double>::infinity()) == 1.0);
  CHECK_THROWS_AS(phi(-1e-12), DomainError);
  CHECK_THROWS_AS(phi(std::nan("")), DomainError);

  SUBCASE("relative accuracy across the evaluation branches") {
    // 40-digit references.
    const std::pair<double, double> ref[] = {
        {1e-4, 4.9996666916646668333e-5}, {1.5e-4, 7.4992500843648762655e-5},
        {1e-3, 4.996669164668331906e-4},  {0.01, 4.9669146831917151785e-3},
        {0.3, 0.12545245177502982655},    {0.4999, 0.18904092974759607378},
        {0.5001, 0.1890986351675513159},  {3.0, 0.53790187962670312706},
    };
    for (const auto& [u, v] : ref) {
      CAPTURE(u);
      CHECK(phi(u) == doctest::Approx(v).epsilon(1e-14));
    }
  }

  SUBCASE("monotone and bounded") {
    double prev = 0.0;
    for (double lu = -12.0; lu <= 15.0; lu += 0.01) {
      const double v = phi(std::pow(10.0, lu));
      CHECK(v >= prev);
      CHECK(v >= 0.0);
      CHECK(v < 1.0);
      prev = v;
    }
  }

  SUBCASE("series and log forms agree on [1e-8, 1e-3]") {
    for (double lu = -8.0; lu <= -3.0; lu += 0.05) {
      const double u = std::pow(10.0, lu);
      const double series = u / 2 - u * u / 3 + u * u * u / 4 - u * u * u * u / 5 + std::pow(u, 5) / 6;
      const double direct = 1.0 - std::log1p(u) / u;
      CHECK(std::abs(phi(u) - series) < 1e-12);
      CHECK(std::abs(direct - series) < 1e-12);
    }
  }
}

TEST_CASE("radial profile lookups take values from the left") {
  const RadialProfile p({1.0, 2.0, 5.0}, {3.0, 7.0, 11.0});
  CHECK(p.at(0.0) == 3.0);
  CHECK(p.at(1.0) == 3.0);
  CHECK(p.at(std::nextafter(1.0, 2.0)) == 7.0);
  CHECK(p.at(2.0) == 7.0);
  CHECK(p.at(5.0) == 11.0);
  CHECK(p.at(5.0001) == 0.0);
  CHECK(p.at_extended(50.0) == 11.0);
  CHECK_THROWS_AS(RadialProfile({2.0, 1.0}, {1.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(RadialProfile({1.0}, {1.0, 2.0}), ValidationError);

  const RadialProfile t = p.truncated(1.5);
  CHECK(t.outer_radius() == 1.5);
  CHECK(t.at(1.2) == 7.0);
  const RadialProfile longer = p.truncated(8.0);
  CHECK(longer.outer_radius() == 8.0);
  CHECK(longer.at(6.0) == 0.0);
}

TEST_CASE("spatial density construction and masses") {
  CHECK_THROWS_AS(SpatialDensity::radial(RadialProfile({1.0}, {-1.0})), ValidationError);
  CHECK_THROWS_AS(SpatialDensity::atomic({{1.0, 0.0, 0.5}}), ValidationError);
  CHECK_THROWS_AS(SpatialDensity::atomic({{0.0, 0.0, 1.0}}), ValidationError);

  const auto d = SpatialDensity::uniform(10.0, 50.0);
  CHECK(d.total_mass() == doctest::Approx(10.0 * std::numbers::pi * 2500.0).epsilon(1e-14));
  CHECK(d.annulus_mass(10.0, 20.0) == doctest::Approx(10.0 * std::numbers::pi * 300.0).epsilon(1e-14));
  CHECK(d.support_radius() == 50.0);
  CHECK(d.truncated(20.0).total_mass() == doctest::Approx(10.0 * std::numbers::pi * 400.0));

  const auto a = SpatialDensity::atomic({{3.0, 4.0, 1.0}, {0.0, 1.0, 2.0}, {-6.0, 8.0, 1.0}});
  CHECK(a.total_mass() == 4.0);
  CHECK(a.support_radius() == 10.0);
  CHECK(a.intensity_at(5.0) == 1.0);
  CHECK(a.annulus_mass(0.0, 5.0) == 3.0);
  CHECK(a.truncated(6.0).points().size() == 2);
}

TEST_CASE("weight functions are strictly positive") {
  CHECK_THROWS_AS(WeightFunction(RadialProfile({1.0}, {0.0})), ValidationError);
  const WeightFunction w(RadialProfile({1.0, 2.0}, {2.0, 3.0}));
  CHECK(w(0.5) == 2.0);
  CHECK(w(1.5) == 3.0);
  CHECK(w(100.0) == 3.0);
  CHECK(w.breakpoints() == std::vector<double>{1.0});
}

TEST_CASE("radial integral") {
  SUBCASE("area times density") {
    const auto d = SpatialDensity::uniform(10.0, 50.0);
    CHECK(radial_integral([](double) { return 1.0; }, d) ==
          doctest::Approx(78539.81633974483).epsilon(1e-12));
  }
  SUBCASE("atomic measure counts points") {
    const auto a = SpatialDensity::atomic({{1.0, 0.0, 1.0}, {0.0, 2.0, 1.0}, {3.0, 3.0, 1.0}});
    CHECK(radial_integral([](double) { return 1.0; }, a) == 3.0);
    CHECK(radial_integral([](double r) { return r; }, a) ==
          doctest::Approx(3.0 + std::sqrt(18.0)).epsilon(1e-15));
  }
  SUBCASE("canonical phi(L(r)) against a 1e6-panel trapezoid and a 30-digit reference") {
    const PathLoss pl(kKappa, kEta);
    const auto d = SpatialDensity::uniform(10.0, 200.0);
    auto f = [&](double r) { return phi(pl.gain(r)); };
    const double value = radial_integral(f, d);
    // The integrand is concentrated below r ~ 0.1; split the trapezoid there.
    auto g = [&](double r) { return r == 0.0 ? 0.0 : f(r) * r; };
    const double brute =
        2.0 * std::numbers::pi * 10.0 * (trapezoid(g, 0.0, 0.5, 1'000'000) + trapezoid(g, 0.5, 200.0, 1'000'000));
    CHECK(value == doctest::Approx(brute).epsilon(1e-8));
    CHECK(value == doctest::Approx(0.0182930660525841082).epsilon(1e-9));
  }
  SUBCASE("discontinuous integrand split at an extra breakpoint") {
    const auto d = SpatialDensity::uniform(1.0, 10.0);
    const std::vector<double> brk{4.0};
    const double v = radial_integral([](double r) { return r <= 4.0 ? 1.0 : 0.0; }, d, {}, brk);
    CHECK(v == doctest::Approx(std::numbers::pi * 16.0).epsilon(1e-13));
  }
  SUBCASE("piecewise density") {
    const auto d = SpatialDensity::radial(RadialProfile({1.0, 3.0}, {2.0, 5.0}));
    const double v = radial_integral([](double) { return 1.0; }, d);
    CHECK(v == doctest::Approx(std::numbers::pi * (2.0 * 1.0 + 5.0 * 8.0)).epsilon(1e-13));
  }
  SUBCASE("linearity") {
    const PathLoss pl(kKappa, kEta);
    const auto d = SpatialDensity::uniform(10.0, 200.0);
    auto f = [&](double r) { return phi(3e9 * pl.gain(r)); };
    auto g = [](double r) { return std::exp(-r / 30.0); };
    const double a = 2.5, b = -0.75;
    const double lhs = radial_integral([&](double r) { return a * f(r) + b * g(r); }, d);
    const double rhs = a * radial_integral(f, d) + b * radial_integral(g, d);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
  }
  SUBCASE("halving the tolerance moves the result by less than the coarser tolerance") {
    const PathLoss pl(kKappa, kEta);
    const auto d = SpatialDensity::uniform(10.0, 200.0);
    auto f = [&](double r) { return phi(6.2e9 * 1e-3 * pl.gain(r)); };
    for (double tol : {1e-6, 1e-8, 1e-10}) {
      QuadratureOptions coarse;
      coarse.rel_tol = tol;
      QuadratureOptions fine;
      fine.rel_tol = tol / 2;
      const double c = radial_integral(f, d, coarse);
      const double x = radial_integral(f, d, fine);
      CHECK(std::abs(c - x) <= tol * std::abs(x));
    }
  }
  SUBCASE("non-integrable integrand is reported") {
    const auto d = SpatialDensity::uniform(1.0, 1.0);
    CHECK_THROWS_AS(radial_integral([](double r) { return 1.0 / (r * r * r); }, d), NumericError);
  }
}

TEST_CASE("gauss-legendre 64 rule") {
  const auto& rule = gauss_legendre_64();
  double wsum = 0.0;
  for (double w : rule.weights) wsum += w;
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(integrate_gauss64([](double t) { return std::pow(t, 41); }, 0.0, 1.0) ==
        doctest::Approx(1.0 / 42.0).epsilon(1e-14));
  CHECK(integrate_gauss64([](double t) { return std::exp(3.0 * t); }, 0.0, 1.0) ==
        doctest::Approx((std::exp(3.0) - 1.0) / 3.0).epsilon(1e-14));
}
