#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "driver.hpp"

namespace propermap::verify {

using driver::InductionState;
using geometry::cplx;

struct CheckEntry {
  int n = 0;
  double b = 0.0;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = true;
  std::string note;
};

struct CheckReport {
  std::string name;
  bool advisory = false;
  bool passed = true;
  double spacing = 0.0;
  std::vector<CheckEntry> entries;
  void add(CheckEntry e) {
    passed = passed && e.pass;
    entries.push_back(std::move(e));
  }
};

// Density of the verification grids: offset from the build grid so that the
// threshold checks never reuse the build's sample points.
double fresh_density(const InductionState& s);

CheckReport check_growth(const InductionState& s);
CheckReport check_convergence(const InductionState& s);
CheckReport check_arcs(const InductionState& s);
// Recomputes every ledger number on the ledger's own grid and compares within
// 1e-12 (relative); also re-checks the angle arrays.
CheckReport check_ledger(const InductionState& s);
CheckReport check_harmonicity(const InductionState& s, double h = 0.01);
CheckReport check_family_continuity(const InductionState& s);

// Five-point discrete Laplacian of u at z with step h.
double laplacian_residual(const std::function<double(cplx)>& u, cplx z, double h);

struct HarmonicProbe {
  double residual_h = 0.0;      // mean |residual| at h
  double residual_half = 0.0;   // mean |residual| at h/2
  double rounding_floor = 0.0;  // expected rounding level at h
  double ratio = 0.0;
  bool rounding_level = false;
  bool second_order = false;
  bool pass() const { return rounding_level || second_order; }
};

HarmonicProbe probe_harmonic(const std::function<double(cplx)>& u, const std::vector<cplx>& points, double h);

struct VerifyResult {
  std::vector<CheckReport> checks;
  bool passed = true;  // all non-advisory checks
};

VerifyResult verify_state(const InductionState& s);
VerifyResult verify_file(const std::string& state_path);
nlohmann::json to_json(const VerifyResult& r);

}  // namespace propermap::verify
