#include "geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "errors.hpp"

namespace propermap::geometry {

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::validation, msg); }

std::vector<double> linspace(double a, double b, int m) {
  std::vector<double> v(m);
  if (m == 1) {
    v[0] = a;
    return v;
  }
  for (int i = 0; i < m; ++i) v[i] = a + (b - a) * static_cast<double>(i) / (m - 1);
  v.back() = b;
  return v;
}

void push(SampleSet& s, cplx z, bool boundary) {
  s.pts.push_back(z);
  s.on_boundary.push_back(boundary ? 1 : 0);
}

void arc_pts(SampleSet& s, double r, double a, double b, double dens) {
  int m = std::max(2, static_cast<int>(std::ceil(dens * r * (b - a))) + 1);
  for (double t : linspace(a, b, m)) push(s, std::polar(r, t), true);
}

void seg_pts(SampleSet& s, double r0, double r1, double phi, double dens) {
  int m = std::max(2, static_cast<int>(std::ceil(dens * (r1 - r0))) + 1);
  for (double r : linspace(r0, r1, m)) push(s, std::polar(r, phi), true);
}

void block_interior(SampleSet& s, double r0, double r1, double a, double b, double dens) {
  int nr = std::max(2, static_cast<int>(dens * (r1 - r0) / 2));
  auto radii = linspace(r0, r1, nr + 2);
  for (int i = 1; i <= nr; ++i) {
    double r = radii[i];
    int m = std::max(2, static_cast<int>(dens * r * (b - a) / 2));
    auto th = linspace(a, b, m + 2);
    for (int k = 1; k <= m; ++k) push(s, std::polar(r, th[k]), false);
  }
}

void block_boundary(SampleSet& s, double r0, double r1, double a, double b, double dens) {
  arc_pts(s, r0, a, b, dens);
  arc_pts(s, r1, a, b, dens);
  seg_pts(s, r0, r1, a, dens);
  seg_pts(s, r0, r1, b, dens);
}

void w_boundary(SampleSet& s, int n, double d, double a, double b, double dens) {
  arc_pts(s, n, a, b, dens);
  seg_pts(s, n, n + 1, a, dens);
  seg_pts(s, n, n + 1, b, dens);
  arc_pts(s, n + 1, a, a + d, dens);
  arc_pts(s, n + 1, b - d, b, dens);
  seg_pts(s, n + d, n + 1, a + d, dens);
  seg_pts(s, n + d, n + 1, b - d, dens);
  arc_pts(s, n + d, a + d, b - d, dens);
}

// Representative of theta (given in [0, 2pi)) inside [a, b], if any.
bool angle_rep(double theta, double a, double b, double slack, double& rep) {
  for (double t : {theta, theta + two_pi, theta - two_pi}) {
    if (t >= a - slack && t <= b + slack) {
      rep = t;
      return true;
    }
  }
  return false;
}

double rslack(double n) { return boundary_slack * std::max(1.0, n); }

bool in_polar_rect(double r, double theta, double r0, double r1, double a, double b) {
  double rep;
  return r >= r0 - rslack(r1) && r <= r1 + rslack(r1) && angle_rep(theta, a, b, boundary_slack, rep);
}

std::vector<Region> expand_union(const Region& r) {
  std::vector<Region> out;
  const auto& A = r.angles;
  std::size_t start = r.kind == Kind::odd_union ? 0 : 1;
  for (std::size_t j = start; j + 1 < A.size(); j += 2) {
    Region p;
    p.kind = r.piece;
    p.n = r.n;
    p.delta = r.delta;
    p.angles = {A[j], A[j + 1]};
    out.push_back(std::move(p));
  }
  return out;
}

bool is_area_kind(Kind k) {
  return k == Kind::disk || k == Kind::sector || k == Kind::lblock || k == Kind::wblock;
}

}  // namespace

void SampleSet::append(const SampleSet& o) {
  pts.insert(pts.end(), o.pts.begin(), o.pts.end());
  on_boundary.insert(on_boundary.end(), o.on_boundary.begin(), o.on_boundary.end());
}

Region empty() { return Region{}; }

Region disk(int n) {
  Region r;
  r.kind = Kind::disk;
  r.n = n;
  return r;
}

Region gamma(int n, std::vector<double> angles) {
  Region r;
  r.kind = Kind::gamma;
  r.n = n;
  r.angles = std::move(angles);
  return r;
}

Region points(int n, std::vector<double> angles) {
  Region r;
  r.kind = Kind::points;
  r.n = n;
  r.angles = std::move(angles);
  return r;
}

static Region two_angle(Kind k, int n, double delta, double a, double b) {
  Region r;
  r.kind = k;
  r.n = n;
  r.delta = delta;
  r.angles = {a, b};
  return r;
}

Region sector(int n, double a, double b) { return two_angle(Kind::sector, n, 0.0, a, b); }
Region arc(int n, double a, double b) { return two_angle(Kind::arc, n, 0.0, a, b); }
Region lblock(int n, double delta, double a, double b) { return two_angle(Kind::lblock, n, delta, a, b); }
Region wblock(int n, double delta, double a, double b) { return two_angle(Kind::wblock, n, delta, a, b); }

Region odd_union(Kind piece, int n, double delta, std::vector<double> array) {
  Region r;
  r.kind = Kind::odd_union;
  r.piece = piece;
  r.n = n;
  r.delta = delta;
  r.angles = std::move(array);
  return r;
}

Region even_union(Kind piece, int n, double delta, std::vector<double> array) {
  Region r = odd_union(piece, n, delta, std::move(array));
  r.kind = Kind::even_union;
  return r;
}

Region union_of(std::vector<Region> parts) {
  Region r;
  r.kind = Kind::union_of;
  r.parts = std::move(parts);
  return r;
}

std::string kind_name(Kind k) {
  switch (k) {
    case Kind::empty: return "empty";
    case Kind::disk: return "disk";
    case Kind::gamma: return "gamma";
    case Kind::points: return "points";
    case Kind::sector: return "sector";
    case Kind::arc: return "arc";
    case Kind::lblock: return "lblock";
    case Kind::wblock: return "wblock";
    case Kind::odd_union: return "odd_union";
    case Kind::even_union: return "even_union";
    case Kind::union_of: return "union";
  }
  return "empty";
}

Kind kind_from_name(const std::string& s) {
  for (Kind k : {Kind::empty, Kind::disk, Kind::gamma, Kind::points, Kind::sector, Kind::arc, Kind::lblock,
                 Kind::wblock, Kind::odd_union, Kind::even_union, Kind::union_of})
    if (kind_name(k) == s) return k;
  invalid("unknown region kind '" + s + "'");
}

void validate_angle_array(const std::vector<double>& A) {
  if (A.size() < 3 || A.size() % 2 == 0) invalid("angle array must have 2l+1 entries with l >= 1");
  if (A.front() != 0.0) invalid("angle array must start at 0");
  if (A.back() != two_pi) invalid("angle array must end at 2pi");
  for (std::size_t i = 1; i < A.size(); ++i)
    if (!(A[i] > A[i - 1])) invalid("angle array must be strictly increasing");
}

static void validate_two_angle(const Region& r) {
  if (r.n < 0) invalid("negative radius index");
  if (r.angles.size() != 2) invalid("expected two angles");
  double a = r.angles[0], b = r.angles[1];
  if (!(a >= 0.0 && b <= two_pi)) invalid("angles must lie in [0, 2pi]");
  if (!(b - a > 0.0 && b - a < two_pi)) invalid("need 0 < b - a < 2pi");
  if (r.kind == Kind::lblock || r.kind == Kind::wblock) {
    double bound = std::min(1.0, b - a) / 3.0;
    if (!(r.delta > 0.0 && r.delta < bound)) invalid("delta must satisfy 0 < delta < (1/3) min{1, b - a}");
  }
}

void validate(const Region& r) {
  switch (r.kind) {
    case Kind::empty: return;
    case Kind::disk:
      if (r.n < 0) invalid("negative radius index");
      return;
    case Kind::gamma:
    case Kind::points:
      if (r.n < 0) invalid("negative radius index");
      for (double a : r.angles)
        if (!(a >= 0.0 && a <= two_pi)) invalid("angles must lie in [0, 2pi]");
      return;
    case Kind::sector:
    case Kind::arc:
    case Kind::lblock:
    case Kind::wblock: validate_two_angle(r); return;
    case Kind::odd_union:
    case Kind::even_union:
      if (!(r.piece == Kind::sector || r.piece == Kind::arc || r.piece == Kind::lblock || r.piece == Kind::wblock))
        invalid("odd/even unions take sector, arc, lblock or wblock pieces");
      validate_angle_array(r.angles);
      for (const auto& p : expand_union(r)) validate_two_angle(p);
      return;
    case Kind::union_of:
      for (const auto& p : r.parts) validate(p);
      return;
  }
}

double polar_angle(cplx z) {
  double t = std::atan2(z.imag(), z.real());
  if (t < 0) t += two_pi;
  if (t >= two_pi) t -= two_pi;
  return t;
}

bool angle_in(double theta, double a, double b, double slack) {
  double rep;
  return angle_rep(theta, a, b, slack, rep);
}

bool contains(const Region& reg, cplx z) {
  double r = std::abs(z);
  double th = polar_angle(z);
  int n = reg.n;
  switch (reg.kind) {
    case Kind::empty: return false;
    case Kind::disk: return r <= n + rslack(n);
    case Kind::gamma:
      if (r < n - rslack(n + 1) || r > n + 1 + rslack(n + 1)) return false;
      for (double a : reg.angles) {
        double d = std::fabs(std::remainder(th - a, two_pi));
        if (d * std::max(r, 1.0) <= rslack(n + 1)) return true;
      }
      return false;
    case Kind::points:
      for (double a : reg.angles)
        if (std::abs(z - std::polar(static_cast<double>(n), a)) <= rslack(n)) return true;
      return false;
    case Kind::sector: return in_polar_rect(r, th, n, n + 1, reg.angles[0], reg.angles[1]);
    case Kind::arc:
      return std::fabs(r - n) <= rslack(n) && angle_in(th, reg.angles[0], reg.angles[1]);
    case Kind::lblock:
      return in_polar_rect(r, th, n + reg.delta, n + 1, reg.angles[0] + reg.delta, reg.angles[1] - reg.delta);
    case Kind::wblock: {
      double a = reg.angles[0], b = reg.angles[1], d = reg.delta, rep;
      if (!(r >= n - rslack(n + 1) && r <= n + 1 + rslack(n + 1))) return false;
      if (!angle_rep(th, a, b, boundary_slack, rep)) return false;
      return r <= n + d + rslack(n + 1) || rep <= a + d + boundary_slack || rep >= b - d - boundary_slack;
    }
    case Kind::odd_union:
    case Kind::even_union:
      for (const auto& p : expand_union(reg))
        if (contains(p, z)) return true;
      return false;
    case Kind::union_of:
      for (const auto& p : reg.parts)
        if (contains(p, z)) return true;
      return false;
  }
  return false;
}

bool is_curve_kind(const Region& r) {
  if (r.kind == Kind::odd_union || r.kind == Kind::even_union) return r.piece == Kind::arc;
  return r.kind == Kind::gamma || r.kind == Kind::arc || r.kind == Kind::points;
}

static SampleSet sample_impl(const Region& reg, double dens, SampleMode mode) {
  SampleSet s;
  int n = reg.n;
  switch (reg.kind) {
    case Kind::empty: break;
    case Kind::disk:
      if (n == 0) {
        push(s, 0.0, true);
        break;
      }
      arc_pts(s, n, 0.0, two_pi, dens);
      if (mode == SampleMode::filled) {
        auto radii = linspace(0.0, n, static_cast<int>(dens * n / 2) + 2);
        radii.pop_back();
        for (double r : radii) {
          int m = std::max(1, static_cast<int>(dens * two_pi * r / 2));
          for (int k = 0; k < m; ++k) push(s, std::polar(r, two_pi * k / m), false);
        }
      }
      break;
    case Kind::gamma:
      for (double a : reg.angles) seg_pts(s, n, n + 1, a, dens);
      break;
    case Kind::points:
      for (double a : reg.angles) push(s, std::polar(static_cast<double>(n), a), true);
      break;
    case Kind::arc: arc_pts(s, n, reg.angles[0], reg.angles[1], dens); break;
    case Kind::sector:
      block_boundary(s, n, n + 1, reg.angles[0], reg.angles[1], dens);
      if (mode == SampleMode::filled) block_interior(s, n, n + 1, reg.angles[0], reg.angles[1], dens);
      break;
    case Kind::lblock: {
      double d = reg.delta, a = reg.angles[0] + d, b = reg.angles[1] - d;
      block_boundary(s, n + d, n + 1, a, b, dens);
      if (mode == SampleMode::filled) block_interior(s, n + d, n + 1, a, b, dens);
      break;
    }
    case Kind::wblock: {
      double d = reg.delta, a = reg.angles[0], b = reg.angles[1];
      w_boundary(s, n, d, a, b, dens);
      if (mode == SampleMode::filled) {
        block_interior(s, n, n + d, a, b, dens);
        block_interior(s, n, n + 1, a, a + d, dens);
        block_interior(s, n, n + 1, b - d, b, dens);
      }
      break;
    }
    case Kind::odd_union:
    case Kind::even_union:
      for (const auto& p : expand_union(reg)) s.append(sample_impl(p, dens, mode));
      break;
    case Kind::union_of:
      for (const auto& p : reg.parts)
        s.append(sample_impl(p, dens, is_curve_kind(p) ? SampleMode::curve : mode));
      break;
  }
  return s;
}

SampleSet sample(const Region& reg, double density, SampleMode mode) {
  validate(reg);
  if (!(density > 0.0)) throw Error(ErrorCode::validation, "sample density must be positive");
  if (mode == SampleMode::filled && is_curve_kind(reg))
    throw Error(ErrorCode::mode, "filled sampling requested for a zero-area region");
  if (mode == SampleMode::curve && is_area_kind(reg.kind))
    throw Error(ErrorCode::mode, "curve sampling requested for an area region");
  return sample_impl(reg, density, mode);
}

SampleSet sample_natural(const Region& reg, double density) {
  return sample(reg, density, is_curve_kind(reg) ? SampleMode::curve : SampleMode::filled);
}

std::vector<cplx> random_disk_points(double R, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<cplx> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(std::polar(R * std::sqrt(u(rng)), two_pi * u(rng)));
  return out;
}

int l_index(int n) {
  int l = 1;
  for (int k = 1; k < n; ++k) l *= 3;
  return l;
}

double max_admissible_delta(const std::vector<double>& A) {
  double g = 1.0;
  for (std::size_t i = 1; i < A.size(); ++i) g = std::min(g, A[i] - A[i - 1]);
  return g / 3.0;
}

std::vector<double> refine_angles(const std::vector<double>& A, double delta) {
  validate_angle_array(A);
  if (!(delta > 0.0 && delta < max_admissible_delta(A)))
    invalid("refinement width must satisfy 0 < delta < (1/3) min{1, gaps}");
  std::vector<double> out;
  out.reserve(3 * (A.size() - 1) + 1);
  for (std::size_t k = 0; k + 1 < A.size(); ++k) {
    out.push_back(A[k]);
    out.push_back(A[k] + delta);
    out.push_back(A[k + 1] - delta);
  }
  out.push_back(two_pi);
  return out;
}

double clamp_delta(const std::vector<double>& A, double delta, double cap_fraction) {
  return std::min(delta, cap_fraction * max_admissible_delta(A));
}

Region alpha(int n, const std::vector<double>& A, bool odd) {
  return odd ? odd_union(Kind::arc, n, 0.0, A) : even_union(Kind::arc, n, 0.0, A);
}

AnnulusPieces decompose_annulus(int n, const std::vector<double>& A, double delta) {
  validate_angle_array(A);
  if (!(delta > 0.0 && delta < max_admissible_delta(A)))
    invalid("collar width must satisfy 0 < delta < (1/3) min{1, gaps}");
  std::vector<double> inner(A.begin(), A.end() - 1);
  AnnulusPieces p;
  p.d_odd = odd_union(Kind::sector, n, 0.0, A);
  p.d_even = even_union(Kind::sector, n, 0.0, A);
  p.w_odd = odd_union(Kind::wblock, n, delta, A);
  p.w_even = even_union(Kind::wblock, n, delta, A);
  p.l_odd = odd_union(Kind::lblock, n, delta, A);
  p.l_even = even_union(Kind::lblock, n, delta, A);
  p.gamma = gamma(n, inner);
  p.points_inner = points(n, inner);
  p.points_outer = points(n + 1, inner);
  p.alpha_odd = alpha(n, A, true);
  p.alpha_even = alpha(n, A, false);
  return p;
}

double outer_radius(const Region& r) {
  switch (r.kind) {
    case Kind::empty: return 0.0;
    case Kind::disk:
    case Kind::points:
    case Kind::arc: return r.n;
    case Kind::gamma:
    case Kind::sector:
    case Kind::lblock:
    case Kind::wblock: return r.n + 1;
    case Kind::odd_union:
    case Kind::even_union: return r.piece == Kind::arc ? r.n : r.n + 1;
    case Kind::union_of: {
      double m = 0.0;
      for (const auto& p : r.parts) m = std::max(m, outer_radius(p));
      return m;
    }
  }
  return 0.0;
}

nlohmann::json to_json(const Region& r) {
  nlohmann::json j;
  j["kind"] = kind_name(r.kind);
  if (r.kind == Kind::union_of) {
    j["parts"] = nlohmann::json::array();
    for (const auto& p : r.parts) j["parts"].push_back(to_json(p));
    return j;
  }
  if (r.kind == Kind::empty) return j;
  j["n"] = r.n;
  if (r.kind == Kind::lblock || r.kind == Kind::wblock || r.kind == Kind::odd_union || r.kind == Kind::even_union)
    j["delta"] = r.delta;
  if (r.kind == Kind::odd_union || r.kind == Kind::even_union) j["piece"] = kind_name(r.piece);
  if (r.kind != Kind::disk) j["angles"] = r.angles;
  return j;
}

Region region_from_json(const nlohmann::json& j) {
  Region r;
  r.kind = kind_from_name(j.at("kind").get<std::string>());
  if (r.kind == Kind::union_of) {
    for (const auto& p : j.at("parts")) r.parts.push_back(region_from_json(p));
    return r;
  }
  if (r.kind == Kind::empty) return r;
  r.n = j.at("n").get<int>();
  if (j.contains("delta")) r.delta = j.at("delta").get<double>();
  if (j.contains("piece")) r.piece = kind_from_name(j.at("piece").get<std::string>());
  if (j.contains("angles")) r.angles = j.at("angles").get<std::vector<double>>();
  validate(r);
  return r;
}

namespace {

struct PathWriter {
  std::ostringstream os;
  double scale, cx, cy;
  bool first = true;
  void to(double r, double t) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%c%.3f %.3f ", first ? 'M' : 'L', cx + scale * r * std::cos(t),
                  cy - scale * r * std::sin(t));
    os << buf;
    first = false;
  }
  void arc(double r, double a, double b) {
    int m = std::max(2, static_cast<int>(std::ceil(std::fabs(b - a) * 48)));
    for (int k = 0; k <= m; ++k) to(r, a + (b - a) * k / m);
  }
  void close() {
    os << "Z ";
    first = true;
  }
};

void path_impl(PathWriter& w, const Region& reg) {
  int n = reg.n;
  switch (reg.kind) {
    case Kind::empty: break;
    case Kind::disk:
      w.arc(n, 0.0, two_pi);
      w.close();
      break;
    case Kind::gamma:
      for (double a : reg.angles) {
        w.first = true;
        w.to(n, a);
        w.to(n + 1, a);
      }
      w.first = true;
      break;
    case Kind::points: break;  // drawn as markers by svg_path
    case Kind::arc:
      w.first = true;
      w.arc(n, reg.angles[0], reg.angles[1]);
      w.first = true;
      break;
    case Kind::sector:
    case Kind::lblock: {
      double d = reg.kind == Kind::lblock ? reg.delta : 0.0;
      double a = reg.angles[0] + d, b = reg.angles[1] - d;
      w.arc(n + d, a, b);
      w.arc(n + 1, b, a);
      w.close();
      break;
    }
    case Kind::wblock: {
      double d = reg.delta, a = reg.angles[0], b = reg.angles[1];
      w.arc(n, a, b);
      w.arc(n + 1, b, b - d);
      w.arc(n + d, b - d, a + d);
      w.arc(n + 1, a + d, a);
      w.close();
      break;
    }
    case Kind::odd_union:
    case Kind::even_union:
      for (const auto& p : expand_union(reg)) path_impl(w, p);
      break;
    case Kind::union_of:
      for (const auto& p : reg.parts) path_impl(w, p);
      break;
  }
}

}  // namespace

std::string svg_path(const Region& reg, double scale, double cx, double cy) {
  PathWriter w{{}, scale, cx, cy};
  if (reg.kind == Kind::points) {
    char buf[128];
    for (double a : reg.angles) {
      double x = cx + scale * reg.n * std::cos(a), y = cy - scale * reg.n * std::sin(a);
      std::snprintf(buf, sizeof buf, "M%.3f %.3f m-3 0 a3 3 0 1 0 6 0 a3 3 0 1 0 -6 0 ", x, y);
      w.os << buf;
    }
    return w.os.str();
  }
  if (reg.kind == Kind::union_of) {
    std::string s;
    for (const auto& p : reg.parts) s += svg_path(p, scale, cx, cy);
    return s;
  }
  path_impl(w, reg);
  return w.os.str();
}

}  // namespace propermap::geometry
