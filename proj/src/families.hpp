#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "geometry.hpp"

namespace propermap::families {

using geometry::cplx;
using geometry::Region;

struct ParamGrid {
  std::vector<double> labels;
  std::size_t size() const { return labels.size(); }
  bool operator==(const ParamGrid&) const = default;
};

void validate(const ParamGrid& g);
std::optional<std::size_t> index_of(const ParamGrid& g, double b, double tol = 1e-12);

// A fiber without a region is the empty set. The runge flag is only set by
// certify_runge.
struct CompactFamily {
  ParamGrid grid;
  std::vector<std::optional<Region>> fibers;
  bool wide = false;
  bool runge = false;
};

using PerParamReal = std::vector<double>;

CompactFamily constant_family(const ParamGrid& g, const Region& r);
CompactFamily per_param_family(const ParamGrid& g, std::vector<std::optional<Region>> fibers);

CompactFamily union_families(const CompactFamily& f1, const CompactFamily& f2);

struct FamilyReport {
  bool valid = true;
  bool wide = true;
  std::vector<double> failing_b;
  std::vector<std::string> messages;
};

FamilyReport is_valid_proper_family(const CompactFamily& f);

// Raster flood fill of the complement on a polar grid: true when no bounded
// complementary component is found at the given angular resolution.
bool runge_raster_check(const Region& r, int angular_cells = 2048, int radial_cells_per_unit = 64);

void certify_runge(CompactFamily& f);

using Evaluator = std::function<double(std::size_t b_index, cplx z)>;

PerParamReal min_over_fibers(const Evaluator& eta, const CompactFamily& f, double density);

inline constexpr double default_rho = 0.1;
PerParamReal continuous_minorant(const PerParamReal& mins, double rho = default_rho);

nlohmann::json to_json(const CompactFamily& f);
CompactFamily family_from_json(const nlohmann::json& j);

}  // namespace propermap::families
