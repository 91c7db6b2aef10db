#pragma once

// Independent membership oracle. It does not call into the library: angles are
// measured relative to each wedge's start ray and radii are compared directly.
// Points within `band` of a boundary are reported as ambiguous (-1).

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <algorithm>
#include <vector>

#include "geometry.hpp"

namespace oracle {

using propermap::geometry::Kind;
using propermap::geometry::Region;
using cplx = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double band = 1e-9;
inline constexpr double on_curve = 1e-12;

// Counter-clockwise angle from direction a to z, in [0, 2pi).
inline double ccw_from(double a, cplx z) {
  cplx u(std::cos(a), std::sin(a));
  double cr = u.real() * z.imag() - u.imag() * z.real();
  double dt = u.real() * z.real() + u.imag() * z.imag();
  double t = std::atan2(cr, dt);
  return t < 0 ? t + kTwoPi : t;
}

// 1 inside the closed wedge a <= arg z <= b, 0 outside, -1 near its rays.
inline int wedge(double a, double b, cplx z) {
  double r = std::abs(z);
  if (b - a >= kTwoPi - 1e-15) return 1;
  double rel = ccw_from(a, z);
  double w = b - a;
  double d = std::min({rel, std::fabs(rel - w), kTwoPi - rel});
  if (d * std::max(r, 1.0) < band) return -1;
  return rel <= w ? 1 : 0;
}

inline int radial(double r, double lo, double hi) {
  if (std::fabs(r - lo) < band || std::fabs(r - hi) < band) return -1;
  return r >= lo && r <= hi ? 1 : 0;
}

inline int both(int x, int y) {
  if (x == 0 || y == 0) return 0;
  if (x < 0 || y < 0) return -1;
  return 1;
}

inline int any(const std::vector<int>& v) {
  bool amb = false;
  for (int x : v) {
    if (x == 1) return 1;
    if (x < 0) amb = true;
  }
  return amb ? -1 : 0;
}

inline int curve_dist(double d) {
  if (d <= on_curve) return 1;
  if (d < band) return -1;
  return 0;
}

inline int member(const Region& g, cplx z) {
  const double r = std::abs(z);
  const int n = g.n;
  switch (g.kind) {
    case Kind::empty: return 0;
    case Kind::disk: return radial(r, -1.0, n);
    case Kind::points: {
      std::vector<int> v;
      for (double a : g.angles) v.push_back(curve_dist(std::abs(z - std::polar<double>(n, a))));
      return any(v);
    }
    case Kind::gamma: {
      std::vector<int> v;
      for (double a : g.angles) {
        cplx u(std::cos(a), std::sin(a));
        double along = u.real() * z.real() + u.imag() * z.imag();
        double t = std::clamp(along, double(n), double(n + 1));
        v.push_back(curve_dist(std::abs(z - t * u)));
      }
      return any(v);
    }
    case Kind::arc: {
      double a = g.angles[0], b = g.angles[1];
      double d = std::fabs(r - n);
      if (d < on_curve) {
        // exactly on the circle: decide by angle, ambiguous near the ends
        return wedge(a, b, z);
      }
      return d < band ? -1 : 0;
    }
    case Kind::sector: return both(radial(r, n, n + 1), wedge(g.angles[0], g.angles[1], z));
    case Kind::lblock:
      return both(radial(r, n + g.delta, n + 1), wedge(g.angles[0] + g.delta, g.angles[1] - g.delta, z));
    case Kind::wblock: {
      int in_sector = both(radial(r, n, n + 1), wedge(g.angles[0], g.angles[1], z));
      if (in_sector != 1) return in_sector;
      // open complement of the L block inside the sector
      int in_l = both(radial(r, n + g.delta, n + 1 + 1.0), wedge(g.angles[0] + g.delta, g.angles[1] - g.delta, z));
      if (in_l < 0) return -1;
      return in_l ? 0 : 1;
    }
    case Kind::odd_union:
    case Kind::even_union: {
      std::vector<int> v;
      std::size_t start = g.kind == Kind::odd_union ? 0 : 1;
      for (std::size_t j = start; j + 1 < g.angles.size(); j += 2) {
        Region p;
        p.kind = g.piece;
        p.n = n;
        p.delta = g.delta;
        p.angles = {g.angles[j], g.angles[j + 1]};
        v.push_back(member(p, z));
      }
      return any(v);
    }
    case Kind::union_of: {
      std::vector<int> v;
      for (const auto& p : g.parts) v.push_back(member(p, z));
      return any(v);
    }
  }
  return 0;
}

// One or two representatives of every region kind, including wrapped and
// degenerate-looking cases.
inline std::vector<Region> catalogue() {
  namespace g = propermap::geometry;
  const double pi = std::numbers::pi;
  std::vector<double> A{0.0, 0.4, 1.3, 2.0, pi, 4.0, 5.0, 5.8, kTwoPi};
  return {
      g::empty(),
      g::disk(0),
      g::disk(3),
      g::gamma(2, {0.0, 0.4, 1.3, pi, 5.5}),
      g::points(2, {0.0, 1.0, 4.0}),
      g::sector(1, 0.3, 2.0),
      g::sector(2, 4.0, kTwoPi),
      g::arc(2, 0.5, 5.0),
      g::lblock(1, 0.2, 0.5, 2.5),
      g::lblock(3, 0.1, 5.0, kTwoPi),
      g::wblock(1, 0.2, 0.5, 2.5),
      g::wblock(2, 0.05, 0.0, 0.4),
      g::odd_union(Kind::sector, 2, 0.0, A),
      g::even_union(Kind::lblock, 2, 0.1, A),
      g::odd_union(Kind::wblock, 2, 0.1, A),
      g::even_union(Kind::arc, 2, 0.0, A),
      g::union_of({g::disk(1), g::lblock(1, 0.2, 0.5, 2.5), g::gamma(1, {3.0})}),
  };
}

// Points that exercise a region: uniform in a disk around it, plus points on
// and just off its curves.
inline std::vector<cplx> probe_points(const Region& g, std::size_t count, std::uint64_t seed) {
  double R = propermap::geometry::outer_radius(g) + 0.7;
  auto pts = propermap::geometry::random_disk_points(R, count, seed);
  if (!propermap::geometry::is_curve_kind(g)) return pts;
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Region> pieces;
  if (g.kind == Kind::odd_union || g.kind == Kind::even_union) {
    std::size_t start = g.kind == Kind::odd_union ? 0 : 1;
    for (std::size_t j = start; j + 1 < g.angles.size(); j += 2) pieces.push_back(propermap::geometry::arc(g.n, g.angles[j], g.angles[j + 1]));
  } else {
    pieces.push_back(g);
  }
  for (std::size_t i = 0; i < count / 2; ++i) {
    const Region& p = pieces[i % pieces.size()];
    cplx z;
    if (p.kind == Kind::arc) {
      z = std::polar<double>(p.n, p.angles[0] + (p.angles[1] - p.angles[0] + 0.6) * u(rng) - 0.3);
    } else {
      double a = p.angles[static_cast<std::size_t>(u(rng) * p.angles.size()) % p.angles.size()];
      double r = p.kind == Kind::points ? p.n : p.n - 0.2 + 1.4 * u(rng);
      z = std::polar(r, a);
    }
    double kick = u(rng);
    if (kick < 0.25) z *= 1.0 + 1e-6;
    else if (kick < 0.5) z *= std::polar(1.0, 1e-6);
    pts[i] = z;
  }
  return pts;
}

}  // namespace oracle
