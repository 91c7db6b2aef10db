#include "verify.hpp"

#include <cmath>
#include <limits>

#include "serialize.hpp"

namespace propermap::verify {

using driver::StepData;

double fresh_density(const InductionState& s) { return 1.5 * s.config.validation_density + 1.0; }

CheckReport check_growth(const InductionState& s) {
  CheckReport r;
  r.name = "growth";
  const double dens = fresh_density(s);
  r.spacing = 2.0 / dens;
  for (const auto& st : s.steps)
    for (std::size_t b = 0; b < s.grid.size(); ++b) {
      cplx w;
      double g = driver::growth_minimum(st.F[0].polys[b], st.F[1].polys[b], st.n, dens, &w);
      CheckEntry e{st.n, s.grid.labels[b], g, st.n - 1.0, g > st.n - 1.0, ""};
      if (!e.pass) e.note = "witness z=" + io::real_str(w.real()) + (w.imag() < 0 ? "" : "+") + io::real_str(w.imag()) + "i";
      r.add(e);
    }
  const StepData& last = s.current();
  for (std::size_t b = 0; b < s.grid.size(); ++b)
    for (int m = 1; m <= last.n; ++m) {
      cplx w;
      double g = driver::growth_minimum(last.F[0].polys[b], last.F[1].polys[b], m, dens, &w);
      CheckEntry e{m, s.grid.labels[b], g, m - 2.0, g > m - 2.0, "final pair"};
      if (!e.pass) e.note += ", witness z=" + io::real_str(w.real()) + (w.imag() < 0 ? "" : "+") + io::real_str(w.imag()) + "i";
      r.add(e);
    }
  return r;
}

CheckReport check_convergence(const InductionState& s) {
  CheckReport r;
  r.name = "convergence";
  const double dens = fresh_density(s);
  r.spacing = 2.0 / dens;
  for (std::size_t k = 1; k < s.steps.size(); ++k) {
    const StepData& st = s.steps[k];
    const StepData& prev = s.steps[k - 1];
    const double budget = driver::step_budget(s.config, st.n);
    for (std::size_t b = 0; b < s.grid.size(); ++b)
      for (int i = 0; i < 2; ++i) {
        double d = driver::sup_difference(st.F[i].polys[b], prev.F[i].polys[b], st.n - 1, dens);
        r.add({st.n, s.grid.labels[b], d, budget, d < budget, i == 0 ? "component 1" : "component 2"});
      }
  }
  // remaining budgets after step n sum to the step-n budget
  for (int n = 1; n <= s.n(); ++n) {
    double tail = 0.0;
    for (int k = n + 1; k <= n + 60; ++k) tail += driver::step_budget(s.config, k);
    double bound = driver::step_budget(s.config, n);
    r.add({n, 0.0, tail, bound, tail <= bound, "geometric tail of later budgets"});
  }
  return r;
}

CheckReport check_arcs(const InductionState& s) {
  CheckReport r;
  r.name = "arcs";
  const double dens = fresh_density(s);
  r.spacing = 1.0 / dens;
  for (const auto& st : s.steps)
    for (std::size_t b = 0; b < s.grid.size(); ++b) {
      double o = driver::arc_minimum(st.F[0].polys[b], st.n, st.angles[b], true, dens);
      double e = driver::arc_minimum(st.F[1].polys[b], st.n, st.angles[b], false, dens);
      r.add({st.n, s.grid.labels[b], o, 1.0 * st.n, o > st.n, "component 1 on odd arcs"});
      r.add({st.n, s.grid.labels[b], e, 1.0 * st.n, e > st.n, "component 2 on even arcs"});
    }
  return r;
}

static bool same(double a, double b) {
  if (std::isnan(a) && std::isnan(b)) return true;
  return std::fabs(a - b) <= 1e-12 * std::max(1.0, std::fabs(b));
}

CheckReport check_ledger(const InductionState& s) {
  CheckReport r;
  r.name = "ledger";
  if (s.ledger.size() != s.steps.size()) {
    r.add({s.n(), 0.0, static_cast<double>(s.ledger.size()), static_cast<double>(s.steps.size()), false,
           "ledger must hold one certificate per step"});
    return r;
  }
  for (std::size_t k = 0; k < s.steps.size(); ++k) {
    const StepData& st = s.steps[k];
    const auto& cert = s.ledger[k];
    r.spacing = 2.0 / cert.density;
    for (std::size_t b = 0; b < s.grid.size(); ++b) {
      auto pc = driver::measure(st, k > 0 ? &s.steps[k - 1] : nullptr, b, cert.density);
      const auto& rec = cert.per_b.at(b);
      const double bl = s.grid.labels[b];
      r.add({st.n, bl, pc.convergence, rec.convergence, same(pc.convergence, rec.convergence), "convergence"});
      r.add({st.n, bl, pc.growth, rec.growth, same(pc.growth, rec.growth), "growth"});
      r.add({st.n, bl, pc.arc_odd, rec.arc_odd, same(pc.arc_odd, rec.arc_odd), "odd arcs"});
      r.add({st.n, bl, pc.arc_even, rec.arc_even, same(pc.arc_even, rec.arc_even), "even arcs"});
      for (int i = 0; i < 2; ++i) {
        const char* tag = i == 0 ? "component 1 coefficients" : "component 2 coefficients";
        double drift = std::abs(pc.circle_value[i] - rec.circle_value[i]);
        bool ok = same(pc.coeff_energy[i], rec.coeff_energy[i]) &&
                  drift <= 1e-12 * std::max(1.0, std::abs(rec.circle_value[i]));
        r.add({st.n, bl, drift, 1e-12 * std::max(1.0, std::abs(rec.circle_value[i])), ok, tag});
      }
      // the recorded values must also clear their thresholds
      bool ok = (k == 0 || rec.convergence < cert.budget) && rec.growth > st.n - 1 && rec.arc_odd > st.n &&
                rec.arc_even > st.n;
      r.add({st.n, bl, rec.growth, st.n - 1.0, ok, "recorded thresholds"});

      const auto& A = st.angles[b];
      bool angles_ok = A.size() == static_cast<std::size_t>(2 * geometry::l_index(st.n) + 1);
      try {
        geometry::validate_angle_array(A);
      } catch (const std::exception&) {
        angles_ok = false;
      }
      if (k > 0 && angles_ok) {
        const auto& P = s.steps[k - 1].angles[b];
        for (std::size_t j = 0; j + 1 < P.size(); ++j) angles_ok = angles_ok && A[3 * j] == P[j];
        if (!(rec.delta > 0.0)) angles_ok = false;
        else angles_ok = angles_ok && A == geometry::refine_angles(P, rec.delta);
      }
      r.add({st.n, bl, static_cast<double>(A.size()), 2.0 * geometry::l_index(st.n) + 1, angles_ok, "angle array"});
    }
  }
  return r;
}

double laplacian_residual(const std::function<double(cplx)>& u, cplx z, double h) {
  return (u(z + h) + u(z - h) + u(z + cplx(0, h)) + u(z - cplx(0, h)) - 4.0 * u(z)) / (h * h);
}

HarmonicProbe probe_harmonic(const std::function<double(cplx)>& u, const std::vector<cplx>& pts, double h) {
  HarmonicProbe p;
  double scale = 0.0;
  for (auto z : pts) {
    p.residual_h += std::fabs(laplacian_residual(u, z, h));
    p.residual_half += std::fabs(laplacian_residual(u, z, 0.5 * h));
    scale = std::max(scale, std::fabs(u(z)) + 1.0);
  }
  p.residual_h /= static_cast<double>(pts.size());
  p.residual_half /= static_cast<double>(pts.size());
  p.rounding_floor = 64.0 * std::numeric_limits<double>::epsilon() * scale / (h * h);
  p.rounding_level = p.residual_h <= p.rounding_floor && p.residual_half <= 4.0 * p.rounding_floor;
  p.ratio = p.residual_half > 0 ? p.residual_h / p.residual_half : std::numeric_limits<double>::infinity();
  p.second_order = p.ratio >= 3.5 && p.ratio <= 4.5;
  return p;
}

CheckReport check_harmonicity(const InductionState& s, double h) {
  CheckReport r;
  r.name = "harmonicity";
  r.spacing = h;
  const StepData& st = s.current();
  std::vector<cplx> pts;
  const double R = st.n;
  for (int i = 1; i <= 4; ++i)
    for (int k = 0; k < 12; ++k) pts.push_back(std::polar(R * (0.2 * i - 0.05), geometry::two_pi * (k + 0.37) / 12));
  for (std::size_t b = 0; b < s.grid.size(); ++b)
    for (int i = 0; i < 2; ++i) {
      const auto& P = st.F[i].polys[b];
      auto p = probe_harmonic([&](cplx z) { return P(z).real(); }, pts, h);
      r.add({st.n, s.grid.labels[b], p.rounding_level ? p.residual_h : p.ratio, p.rounding_level ? p.rounding_floor : 4.0,
             p.pass(), p.rounding_level ? "rounding level" : "ratio under h -> h/2"});
    }
  return r;
}

CheckReport check_family_continuity(const InductionState& s) {
  CheckReport r;
  r.name = "family_continuity";
  r.advisory = true;
  const double dens = s.config.validation_density;
  r.spacing = 2.0 / dens;
  const StepData& st = s.current();
  double budgets = 0.0;
  for (int k = 2; k <= st.n; ++k) budgets += driver::step_budget(s.config, k);
  auto samples = geometry::sample(geometry::disk(st.n), dens, geometry::SampleMode::filled);
  for (std::size_t b = 0; b + 1 < s.grid.size(); ++b) {
    double seed_var = std::abs(driver::seed_for(s.config, b + 1) - driver::seed_for(s.config, b));
    for (int i = 0; i < 2; ++i) {
      double m = 0.0;
      for (auto z : samples.pts) m = std::max(m, std::abs(st.F[i].polys[b + 1](z) - st.F[i].polys[b](z)));
      double thr = seed_var + 2.0 * budgets;
      r.add({st.n, s.grid.labels[b], m, thr, m <= thr, "adjacent parameters"});
    }
  }
  return r;
}

VerifyResult verify_state(const InductionState& s) {
  VerifyResult v;
  v.checks.push_back(check_growth(s));
  v.checks.push_back(check_convergence(s));
  v.checks.push_back(check_arcs(s));
  v.checks.push_back(check_ledger(s));
  v.checks.push_back(check_harmonicity(s));
  v.checks.push_back(check_family_continuity(s));
  for (const auto& c : v.checks)
    if (!c.advisory) v.passed = v.passed && c.passed;
  return v;
}

VerifyResult verify_file(const std::string& path) { return verify_state(io::state_from_json(io::read_json_file(path))); }

nlohmann::json to_json(const VerifyResult& r) {
  nlohmann::json j;
  j["passed"] = r.passed;
  j["checks"] = nlohmann::json::array();
  for (const auto& c : r.checks) {
    nlohmann::json cj;
    cj["name"] = c.name;
    cj["advisory"] = c.advisory;
    cj["passed"] = c.passed;
    cj["grid_spacing"] = io::real_str(c.spacing);
    cj["entries"] = nlohmann::json::array();
    for (const auto& e : c.entries)
      cj["entries"].push_back({{"n", e.n},
                               {"b", io::real_str(e.b)},
                               {"value", io::real_str(e.value)},
                               {"threshold", io::real_str(e.threshold)},
                               {"pass", e.pass},
                               {"note", e.note}});
    j["checks"].push_back(cj);
  }
  return j;
}

}  // namespace propermap::verify
