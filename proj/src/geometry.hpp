#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

namespace propermap::geometry {

using cplx = std::complex<double>;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Slack used when testing points that were generated on a boundary.
inline constexpr double boundary_slack = 1e-12;

enum class Kind { empty, disk, gamma, points, sector, arc, lblock, wblock, odd_union, even_union, union_of };

// Angles are kept in [0, 2pi]; 0 and 2pi are distinct values.
struct Region {
  Kind kind = Kind::empty;
  int n = 0;
  double delta = 0.0;
  std::vector<double> angles;
  Kind piece = Kind::sector;  // element kind of odd/even unions
  std::vector<Region> parts;
};

Region empty();
Region disk(int n);
Region gamma(int n, std::vector<double> angles);
Region points(int n, std::vector<double> angles);
Region sector(int n, double a, double b);
Region arc(int n, double a, double b);
Region lblock(int n, double delta, double a, double b);
Region wblock(int n, double delta, double a, double b);
// Union over the consecutive pairs of a full angle array (first 0, last 2pi).
// Odd pieces use pairs (0,1), (2,3), ...; even pieces use (1,2), (3,4), ...
Region odd_union(Kind piece, int n, double delta, std::vector<double> array);
Region even_union(Kind piece, int n, double delta, std::vector<double> array);
Region union_of(std::vector<Region> parts);

std::string kind_name(Kind k);
Kind kind_from_name(const std::string& s);

// Throws Error(validation) when the region violates its invariants.
void validate(const Region& r);
void validate_angle_array(const std::vector<double>& array);

// Polar angle in [0, 2pi).
double polar_angle(cplx z);
bool angle_in(double theta, double a, double b, double slack = boundary_slack);

bool contains(const Region& r, cplx z);

enum class SampleMode { boundary, filled, curve };

struct SampleSet {
  std::vector<cplx> pts;
  std::vector<std::uint8_t> on_boundary;
  void append(const SampleSet& o);
  std::size_t size() const { return pts.size(); }
};

// Deterministic stratified polar sample. Curves get `density` points per unit
// length; areas use a polar grid with spacing 2/density plus their boundary.
SampleSet sample(const Region& r, double density, SampleMode mode);
// Picks the natural mode for the kind (filled for areas, curve for curves).
SampleSet sample_natural(const Region& r, double density);
bool is_curve_kind(const Region& r);

// Seeded uniform points in the disk of radius R, for oracle cross-checks only.
std::vector<cplx> random_disk_points(double R, std::size_t count, std::uint64_t seed);

int l_index(int n);  // 3^(n-1)
double max_admissible_delta(const std::vector<double>& array);  // (1/3) min{1, gaps}
std::vector<double> refine_angles(const std::vector<double>& array, double delta);
double clamp_delta(const std::vector<double>& array, double delta, double cap_fraction);

struct AnnulusPieces {
  Region d_odd, d_even, w_odd, w_even, l_odd, l_even;
  Region gamma, points_inner, points_outer;
  Region alpha_odd, alpha_even;  // arcs at the inner radius n
};

AnnulusPieces decompose_annulus(int n, const std::vector<double>& array, double delta);

// Arcs of the given parity at radius n over an angle array.
Region alpha(int n, const std::vector<double>& array, bool odd);

double outer_radius(const Region& r);

nlohmann::json to_json(const Region& r);
Region region_from_json(const nlohmann::json& j);

// SVG path data with a world-to-screen scale factor and centre offset.
std::string svg_path(const Region& r, double scale, double cx, double cy);

}  // namespace propermap::geometry
