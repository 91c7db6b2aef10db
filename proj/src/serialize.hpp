#pragma once

#include <string>

#include <json.hpp>

#include "driver.hpp"

namespace propermap::io {

using nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

// Reals are written as shortest round-trip decimal strings.
std::string real_str(double v);
double real_from(const json& j);

json config_to_json(const driver::RunConfig& c);
driver::RunConfig config_from_json(const json& j);

json poly_to_json(const engine::Poly& p);
engine::Poly poly_from_json(const json& j);

json state_to_json(const driver::InductionState& s);
driver::InductionState state_from_json(const json& j);

json manifest_json(const driver::RunResult& r);

json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// CSV over a res x res square grid covering K_N.
void write_samples_csv(const driver::InductionState& s, std::size_t b, int resolution, const std::string& path);

// Region decomposition of step n (D/W/L, segments, angle points).
std::string regions_svg(const driver::InductionState& s, int n);
// Shading of max(Re F_1, Re F_2) over K_n at the final step, n-1 contour highlighted.
std::string growth_svg(const driver::InductionState& s, int n);
// One example of every region kind at index n.
std::string region_catalog_svg(int n);

}  // namespace propermap::io
