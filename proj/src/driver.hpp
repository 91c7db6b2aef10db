#pragma once

#include <array>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "engine.hpp"

namespace propermap::driver {

using engine::Poly;
using engine::PolyFamily;
using families::ParamGrid;
using geometry::cplx;

struct RunConfig {
  int steps = 3;
  std::vector<double> param_grid{0.0};
  std::vector<cplx> seeds{cplx(2.0)};  // one value, or one per parameter
  double budget_scale = 1.0;
  int max_degree = 400;
  double fit_density = 12.0;
  double validation_density = 24.0;
  double minorant_rho = 0.1;
  double delta_cap_fraction = 1.0 - 1e-6;
  double soft_tolerance = 1.5;
  double margin_goal_fraction = 0.45;
  double margin_goal_cap = 0.1;
  // part 1 keeps the own component above its level on a collar of this
  // fraction of the admissible width; 0 leaves the collar to chance
  double collar_target_fraction = 0.9;
  // bound on |F| over the next disk, kept by every fit
  double growth_cap = 1e4;
  bool stop_on_stall = true;
  std::string output_dir = ".";
};

void validate(const RunConfig& c);
cplx seed_for(const RunConfig& c, std::size_t b);

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct ParamCertificate {
  double convergence = kNaN;  // sup over K_{n-1} of |F_n - F_{n-1}|, both components
  double growth = kNaN;       // min over A_n of max(Re F_1, Re F_2)
  double arc_odd = kNaN;      // min Re F_1 on odd arcs at radius n
  double arc_even = kNaN;     // min Re F_2 on even arcs at radius n
  double delta = kNaN;        // collar width that produced this step's angles
  std::array<int, 4> degrees{0, 0, 0, 0};  // part 1 (c1, c2), part 3 (c1, c2)
  // fingerprints of the stored coefficients, per component
  std::array<double, 2> coeff_energy{kNaN, kNaN};
  std::array<cplx, 2> circle_value{cplx(kNaN), cplx(kNaN)};
};

struct StepCertificate {
  int n = 1;
  double budget = kNaN;   // threshold for convergence
  double density = 0.0;   // sampling density of the certificate grids
  double seconds = 0.0;
  std::vector<ParamCertificate> per_b;
};

struct StepData {
  int n = 1;
  std::vector<std::vector<double>> angles;  // per parameter
  std::array<PolyFamily, 2> F;
};

struct InductionState {
  RunConfig config;
  ParamGrid grid;
  std::vector<StepData> steps;
  std::vector<StepCertificate> ledger;
  int n() const { return steps.empty() ? 0 : steps.back().n; }
  const StepData& current() const { return steps.back(); }
};

struct FitRecord {
  int step = 0;
  int part = 0;
  int component = 0;
  double b = 0.0;
  engine::OneSidedReport report;
  double seconds = 0.0;
};

using Progress = std::function<void(const std::string&)>;

// Budget of the n-th convergence condition: budget_scale * 2^{-(n-1)}.
double step_budget(const RunConfig& c, int n);
double part_tolerance(const RunConfig& c, int n);  // budget_scale * 2^{-(n+1)}

InductionState init(const RunConfig& config);

// Per-component targets: (K_n, F_{n,i}) and the radial ramps on the segments.
std::array<engine::PiecewiseTarget, 2> extend_along_segments(const InductionState& s);
cplx ramp_value(cplx w0, int n, double r);

struct Part1Result {
  std::array<PolyFamily, 2> Ft;
  std::vector<FitRecord> fits;
};
Part1Result part1_approximate(const InductionState& s, const std::array<engine::PiecewiseTarget, 2>& targets);

struct CollarResult {
  std::vector<double> delta;                  // per parameter, after clamping
  std::array<std::vector<double>, 2> raw;     // per component, before clamping
  std::vector<std::vector<double>> angles;    // refined arrays
};
CollarResult compute_collar_delta(const InductionState& s, const std::array<PolyFamily, 2>& Ft);

struct Part3Result {
  std::vector<FitRecord> fits;
};
// Advances the state by one step on success; leaves it untouched on failure.
Part3Result part3_correct(InductionState& s, const std::array<PolyFamily, 2>& Ft, const CollarResult& collar,
                          const Part1Result& p1, double seconds_before);

// ---- certificate measurements, shared with verification ----
// Sum of |c_k|^2, and the value at a fixed irrational angle on the scale circle.
// Any change of a single coefficient by e moves the second by exactly e.
std::pair<double, cplx> coefficient_fingerprint(const Poly& p);
double sup_difference(const Poly& a, const Poly& b, int disk_n, double density);
double growth_minimum(const Poly& f1, const Poly& f2, int n, double density, cplx* witness = nullptr);
double arc_minimum(const Poly& f, int n, const std::vector<double>& angles, bool odd, double density);
ParamCertificate measure(const StepData& step, const StepData* previous, std::size_t b, double density);

struct RunResult {
  InductionState state;
  std::vector<FitRecord> fits;
  std::vector<double> step_seconds;
  std::vector<std::vector<double>> final_growth;  // [b][m-1]: min over A_m of max Re, final pair
  bool ok = false;
  std::string error;
  int error_code = 0;
};

RunResult run(const RunConfig& config, const Progress& progress = {});

struct Evaluation {
  cplx f1, f2;
  bool certified = false;
  int disk_index = 0;        // smallest m with z in K_m
  double tail_bound = kNaN;  // distance bound to the limit map on K_N
};

Evaluation evaluate(const InductionState& s, std::size_t b, cplx z);
std::array<double, 2> harmonic_map(const InductionState& s, std::size_t b, cplx z);

}  // namespace propermap::driver
