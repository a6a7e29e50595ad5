#pragma once

// Adaptive Simpson quadrature with Richardson extrapolation, plus a fixed
// 64-point Gauss-Legendre rule for smooth integrands on bounded intervals.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "erlang_rain/errors.hpp"

namespace erlang_rain {

struct QuadratureOptions {
  double rel_tol = 1e-9;
  /// Absolute floor on the error target; keeps vanishing integrals from
  /// driving the recursion into roundoff.
  double abs_tol = 1e-300;
  int max_depth = 48;
};

namespace detail {

struct SimpsonPanel {
  double a, fa, m, fm, b, fb, whole;
};

template <class F>
double simpson_recurse(F& f, const SimpsonPanel& p, double tol, int depth, bool& ok) {
  const double lm = 0.5 * (p.a + p.m);
  const double rm = 0.5 * (p.m + p.b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double h = p.b - p.a;
  const double left = h / 12.0 * (p.fa + 4.0 * flm + p.fm);
  const double right = h / 12.0 * (p.fm + 4.0 * frm + p.fb);
  const double both = left + right;
  const double delta = both - p.whole;
  // The second test stops refinement once the two estimates agree to
  // roundoff, which the halved tolerance can otherwise outrun. Rounding of
  // the abscissae contributes ~eps * |x| / h relative noise on narrow panels.
  const double noise = 1e-14 * (std::abs(left) + std::abs(right)) *
                       std::max(1.0, (std::abs(p.a) + std::abs(p.b)) / h);
  if (std::abs(delta) <= 15.0 * tol || std::abs(delta) <= noise || !(h > 0.0)) {
    return both + delta / 15.0;
  }
  if (depth <= 0 || lm <= p.a || rm >= p.b) {
    ok = false;
    return both + delta / 15.0;
  }
  return simpson_recurse(f, {p.a, p.fa, lm, flm, p.m, p.fm, left}, 0.5 * tol, depth - 1, ok) +
         simpson_recurse(f, {p.m, p.fm, rm, frm, p.b, p.fb, right}, 0.5 * tol, depth - 1, ok);
}

}  // namespace detail

/// Integrates f over each of the consecutive pieces [edges[i], edges[i+1]]
/// with relative tolerance opts.rel_tol on the total. Pieces are integrated
/// separately so that discontinuities placed on edges cost nothing.
/// The integrand is never evaluated exactly at an edge.
/// Throws NumericError when some piece fails to converge.
template <class F>
double integrate_pieces(F&& f, std::span<const double> edges, const QuadratureOptions& opts = {}) {
  if (edges.size() < 2) return 0.0;
  constexpr int kCoarse = 8;
  struct Piece {
    double a, b;
    std::array<double, 2 * kCoarse + 1> fx;
    double coarse;
  };
  std::vector<Piece> pieces;
  pieces.reserve(edges.size() - 1);
  double magnitude = 0.0;
  double total_len = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double a = edges[i];
    const double b = edges[i + 1];
    if (!(b > a)) continue;
    Piece p{a, b, {}, 0.0};
    const double h = (b - a) / (2 * kCoarse);
    double s = 0.0;
    for (int k = 0; k <= 2 * kCoarse; ++k) {
      // Edges are sampled one ulp inside the piece so that one-sided limits
      // are used at discontinuities sitting on an edge.
      const double x = (k == 0) ? std::nextafter(a, b) : (k == 2 * kCoarse) ? std::nextafter(b, a) : a + k * h;
      p.fx[k] = f(x);
      const double w = (k == 0 || k == 2 * kCoarse) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      s += w * p.fx[k];
    }
    p.coarse = s * h / 3.0;
    magnitude += std::abs(p.coarse);
    total_len += b - a;
    pieces.push_back(p);
  }
  if (pieces.empty()) return 0.0;
  const double tol = std::max(opts.rel_tol * magnitude, opts.abs_tol);
  double sum = 0.0;
  bool ok = true;
  for (const Piece& p : pieces) {
    const double h = (p.b - p.a) / (2 * kCoarse);
    const double share = tol * (p.b - p.a) / total_len / kCoarse;
    for (int k = 0; k < kCoarse; ++k) {
      const double a = p.a + 2 * k * h;
      const double b = (k + 1 == kCoarse) ? p.b : p.a + 2 * (k + 1) * h;
      const double m = p.a + (2 * k + 1) * h;
      const detail::SimpsonPanel panel{a, p.fx[2 * k], m, p.fx[2 * k + 1], b, p.fx[2 * k + 2],
                                       (b - a) / 6.0 * (p.fx[2 * k] + 4.0 * p.fx[2 * k + 1] + p.fx[2 * k + 2])};
      sum += detail::simpson_recurse(f, panel, share, opts.max_depth, ok);
    }
    if (!ok) {
      throw NumericError("adaptive quadrature did not converge on [" + std::to_string(p.a) + ", " +
                         std::to_string(p.b) + "] (integrand not integrable or too irregular)");
    }
  }
  if (!std::isfinite(sum)) {
    throw NumericError("adaptive quadrature produced a non-finite value");
  }
  return sum;
}

template <class F>
double integrate(F&& f, double a, double b, const QuadratureOptions& opts = {}) {
  const std::array<double, 2> edges{a, b};
  return integrate_pieces(f, edges, opts);
}

/// Nodes and weights of the 64-point Gauss-Legendre rule on [0, 1].
struct GaussLegendre64 {
  std::array<double, 64> nodes;
  std::array<double, 64> weights;
};

const GaussLegendre64& gauss_legendre_64();

/// Fixed-order integral over [a, b]; exact for polynomials of degree <= 127.
template <class F>
double integrate_gauss64(F&& f, double a, double b) {
  const auto& rule = gauss_legendre_64();
  double s = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    s += rule.weights[i] * f(a + (b - a) * rule.nodes[i]);
  }
  return s * (b - a);
}

}  // namespace erlang_rain
