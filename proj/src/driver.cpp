#include "driver.hpp"


#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <tuple>

#include "errors.hpp"
#include "parallel.hpp"

namespace propermap::driver {

using geometry::Region;
using geometry::two_pi;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> inner_angles(const std::vector<double>& A) { return {A.begin(), A.end() - 1}; }

Region annulus(int n) {
  if (n <= 1) return geometry::disk(1);
  return geometry::union_of({geometry::sector(n - 1, 0.0, std::numbers::pi), geometry::sector(n - 1, std::numbers::pi, two_pi)});
}

double goal(const RunConfig& c, double value, double level) {
  return std::clamp(c.margin_goal_fraction * (value - level), 1e-3, c.margin_goal_cap);
}

void add_cap(engine::OneSidedProblem& P, const engine::Sampling& S, int n, double cap) {
  for (auto z : geometry::sample(geometry::disk(n + 1), S.density, geometry::SampleMode::boundary).pts) P.cap.add(z, 0.0, cap);
}

void report(const Progress& p, const std::string& msg) {
  if (p) p(msg);
}

}  // namespace

void validate(const RunConfig& c) {
  auto bad = [](const std::string& m) { throw Error(ErrorCode::config, m); };
  if (c.steps < 1) bad("steps must be at least 1");
  families::validate(ParamGrid{c.param_grid});
  if (c.seeds.size() != 1 && c.seeds.size() != c.param_grid.size()) bad("seed must be a single value or one per parameter");
  if (!(c.budget_scale > 0.0 && c.budget_scale <= 1.0)) bad("budget_scale must lie in (0, 1]");
  if (c.max_degree < 8) bad("max_degree must be at least 8");
  if (!(c.fit_density > 0.0 && c.validation_density > 0.0)) bad("densities must be positive");
  if (!(c.validation_density >= 2.0 * c.fit_density)) bad("validation_density must be at least 2 * fit_density");
  if (!(c.minorant_rho > 0.0 && c.minorant_rho < 1.0)) bad("minorant_rho must lie in (0, 1)");
  if (!(c.delta_cap_fraction > 0.0 && c.delta_cap_fraction < 1.0)) bad("delta_cap_fraction must lie in (0, 1)");
  if (!(c.soft_tolerance > 0.0)) bad("soft_tolerance must be positive");
  if (!(c.margin_goal_fraction > 0.0 && c.margin_goal_fraction < 1.0)) bad("margin_goal_fraction must lie in (0, 1)");
  if (!(c.margin_goal_cap > 0.0)) bad("margin_goal_cap must be positive");
  if (!(c.growth_cap > 0.0)) bad("growth_cap must be positive");
  if (!(c.collar_target_fraction >= 0.0 && c.collar_target_fraction < 1.0))
    bad("collar_target_fraction must lie in [0,1)");
}

cplx seed_for(const RunConfig& c, std::size_t b) { return c.seeds.size() == 1 ? c.seeds[0] : c.seeds[b]; }

double step_budget(const RunConfig& c, int n) { return c.budget_scale * std::ldexp(1.0, -(n - 1)); }
double part_tolerance(const RunConfig& c, int n) { return c.budget_scale * std::ldexp(1.0, -(n + 1)); }

std::pair<double, cplx> coefficient_fingerprint(const Poly& p) {
  double e = 0.0;
  for (auto c : p.coeffs) e += std::norm(c);
  return {e, p(std::polar(p.scale, std::numbers::sqrt2))};
}

double sup_difference(const Poly& a, const Poly& b, int disk_n, double density) {
  auto s = geometry::sample(geometry::disk(disk_n), density, geometry::SampleMode::filled);
  double m = 0.0;
  for (auto z : s.pts) m = std::max(m, std::abs(a(z) - b(z)));
  return m;
}

double growth_minimum(const Poly& f1, const Poly& f2, int n, double density, cplx* witness) {
  auto s = geometry::sample(annulus(n), density, geometry::SampleMode::filled);
  double m = std::numeric_limits<double>::infinity();
  for (auto z : s.pts) {
    double v = std::max(f1(z).real(), f2(z).real());
    if (v < m) {
      m = v;
      if (witness) *witness = z;
    }
  }
  return m;
}

double arc_minimum(const Poly& f, int n, const std::vector<double>& angles, bool odd, double density) {
  auto s = geometry::sample(geometry::alpha(n, angles, odd), density, geometry::SampleMode::curve);
  double m = std::numeric_limits<double>::infinity();
  for (auto z : s.pts) m = std::min(m, f(z).real());
  return m;
}

ParamCertificate measure(const StepData& step, const StepData* prev, std::size_t b, double density) {
  ParamCertificate pc;
  const Poly& f1 = step.F[0].polys[b];
  const Poly& f2 = step.F[1].polys[b];
  if (prev)
    pc.convergence = std::max(sup_difference(f1, prev->F[0].polys[b], step.n - 1, density),
                              sup_difference(f2, prev->F[1].polys[b], step.n - 1, density));
  pc.growth = growth_minimum(f1, f2, step.n, density);
  pc.arc_odd = arc_minimum(f1, step.n, step.angles[b], true, density);
  pc.arc_even = arc_minimum(f2, step.n, step.angles[b], false, density);
  for (int i = 0; i < 2; ++i)
    std::tie(pc.coeff_energy[i], pc.circle_value[i]) = coefficient_fingerprint(step.F[i].polys[b]);
  return pc;
}

InductionState init(const RunConfig& config) {
  validate(config);
  InductionState s;
  s.config = config;
  s.grid = ParamGrid{config.param_grid};
  StepData st;
  st.n = 1;
  for (int i = 0; i < 2; ++i) st.F[i].grid = s.grid;
  for (std::size_t b = 0; b < s.grid.size(); ++b) {
    cplx seed = seed_for(config, b);
    if (!(seed.real() > 1.0))
      throw Error(ErrorCode::precondition, "seed real part must exceed 1 (got " + std::to_string(seed.real()) + ")");
    st.angles.push_back({0.0, std::numbers::pi, two_pi});
    for (int i = 0; i < 2; ++i) st.F[i].polys.push_back(Poly::constant(seed));
  }
  s.steps.push_back(st);
  StepCertificate cert;
  cert.n = 1;
  cert.budget = step_budget(config, 1);
  cert.density = config.validation_density;
  for (std::size_t b = 0; b < s.grid.size(); ++b) {
    cert.per_b.push_back(measure(st, nullptr, b, cert.density));
    const auto& pc = cert.per_b.back();
    if (!(pc.growth > 0.0 && pc.arc_odd > 1.0 && pc.arc_even > 1.0))
      throw Error(ErrorCode::certificate_failed, "seed fails the first-step certificate");
  }
  s.ledger.push_back(cert);
  return s;
}

cplx ramp_value(cplx w0, int n, double r) { return w0 + (static_cast<double>(n + 2) - w0) * (r - n); }

std::array<engine::PiecewiseTarget, 2> extend_along_segments(const InductionState& s) {
  const StepData& st = s.current();
  const int n = st.n;
  std::array<engine::PiecewiseTarget, 2> out;
  std::vector<std::optional<Region>> rays;
  for (std::size_t b = 0; b < s.grid.size(); ++b) {
    for (int i = 0; i < 2; ++i)
      for (double a : inner_angles(st.angles[b]))
        if (!(st.F[i].polys[b](std::polar(static_cast<double>(n), a)).real() > n))
          throw Error(ErrorCode::precondition, "arc condition at radius n does not hold at an angle point");
    rays.push_back(geometry::gamma(n, inner_angles(st.angles[b])));
  }
  auto rayfam = families::per_param_family(s.grid, rays);
  auto diskfam = families::constant_family(s.grid, geometry::disk(n));
  for (int i = 0; i < 2; ++i) {
    const PolyFamily F = st.F[i];
    out[i].grid = s.grid;
    out[i].pieces.push_back({diskfam, [F](std::size_t b, cplx z) { return F(b, z); }});
    out[i].pieces.push_back({rayfam, [F, n](std::size_t b, cplx z) {
                               double phi = geometry::polar_angle(z);
                               cplx w0 = F(b, std::polar(static_cast<double>(n), phi));
                               return ramp_value(w0, n, std::abs(z));
                             }});
  }
  return out;
}

Part1Result part1_approximate(const InductionState& s, const std::array<engine::PiecewiseTarget, 2>& targets) {
  const StepData& st = s.current();
  const RunConfig& cfg = s.config;
  const int n = st.n;
  const double tol = part_tolerance(cfg, n);
  engine::Limits lim{cfg.max_degree, cfg.fit_density, cfg.validation_density};
  lim.stop_on_stall = cfg.stop_on_stall;
  const std::size_t M = s.grid.size();

  Part1Result res;
  for (int i = 0; i < 2; ++i) {
    res.Ft[i].grid = s.grid;
    res.Ft[i].polys.resize(M);
  }
  res.fits.resize(2 * M);
  parallel_for(2 * M, [&](std::size_t task) {
    std::size_t b = task / 2;
    int c = static_cast<int>(task % 2);
    const auto& T = targets[c];
    const Region& rays = *T.pieces[1].family.fibers[b];
    const auto& A = st.angles[b];
    const double collar = cfg.collar_target_fraction * geometry::max_admissible_delta(A);
    auto build = [&](const engine::Sampling& S) {
      engine::OneSidedProblem P;
      for (auto z : S.points(geometry::disk(n))) P.budget.add(z, T.pieces[0].eval(b, z), tol);
      engine::Sampling fine{2.0 * S.density, S.interior_density};
      for (auto z : fine.points(rays)) {
        cplx f = T.pieces[1].eval(b, z);
        P.soft.add(z, f, cfg.soft_tolerance);
        P.lower.add(z, n, goal(cfg, f.real(), n));
      }
      for (auto z : S.points(geometry::alpha(n, A, c == 0))) P.lower.add(z, n, goal(cfg, T.pieces[0].eval(b, z).real(), n));
      for (double a : inner_angles(A)) P.lower.add(std::polar(n + 1.0, a), n + 1, goal(cfg, n + 2.0, n + 1));
      add_cap(P, S, n, cfg.growth_cap);
      if (collar > 0.0)
        for (std::size_t j = static_cast<std::size_t>(c); j + 1 < A.size(); j += 2) {
          for (auto z : S.points(geometry::wblock(n, collar, A[j], A[j + 1])))
            if (std::abs(z) > n + geometry::boundary_slack * n) P.lower.add(z, n, goal(cfg, n + 1.0, n));
          for (auto [lo, hi] : {std::pair{A[j], A[j] + collar}, std::pair{A[j + 1] - collar, A[j + 1]}})
            for (auto z : S.points(geometry::arc(n + 1, lo, hi))) P.lower.add(z, n + 1, goal(cfg, n + 2.0, n + 1));
        }
      return P;
    };
    auto t0 = std::chrono::steady_clock::now();
    auto [P, rep] = engine::approximate_one_sided(build, n + 1.0, lim, b);
    res.Ft[c].polys[b] = P;
    res.fits[task] = FitRecord{n, 1, c + 1, s.grid.labels[b], rep, seconds_since(t0)};
  });
  return res;
}

CollarResult compute_collar_delta(const InductionState& s, const std::array<PolyFamily, 2>& Ft) {
  const StepData& st = s.current();
  const RunConfig& cfg = s.config;
  const int n = st.n;
  const double dens = 4.0 * cfg.fit_density;
  const std::size_t M = s.grid.size();
  CollarResult out;
  out.delta.resize(M);
  out.angles.resize(M);
  for (int c = 0; c < 2; ++c) out.raw[c].resize(M);
  for (std::size_t b = 0; b < M; ++b) {
    const auto& A = st.angles[b];
    for (int c = 0; c < 2; ++c) {
      const Poly& f = Ft[c].polys[b];
      double least = std::numeric_limits<double>::infinity();
      for (std::size_t j = static_cast<std::size_t>(c); j + 1 < A.size(); j += 2) {
        double a = A[j], e = A[j + 1];
        std::vector<cplx> bad;
        for (auto z : geometry::sample(geometry::sector(n, a, e), dens, geometry::SampleMode::filled).pts)
          if (f(z).real() <= n) bad.push_back(z);
        for (auto z : geometry::sample(geometry::arc(n + 1, a, e), dens, geometry::SampleMode::curve).pts)
          if (f(z).real() <= n + 1) bad.push_back(z);
        bad.push_back(std::polar(n + 1.0, 0.5 * (a + e)));
        for (auto z : bad) {
          double phi = geometry::polar_angle(z);
          if (phi < a - geometry::boundary_slack) phi += two_pi;
          least = std::min({least, std::abs(z) - n, phi - a, e - phi});
        }
      }
      out.raw[c][b] = families::continuous_minorant({std::max(least, 1e-300)}, cfg.minorant_rho)[0];
      if (!(least > 0.0)) out.raw[c][b] = 0.0;
    }
    double d = geometry::clamp_delta(A, std::min(out.raw[0][b], out.raw[1][b]), cfg.delta_cap_fraction);
    if (!(d > 0.0))
      throw Error(ErrorCode::certificate_failed,
                  "collar width vanished at b=" + std::to_string(s.grid.labels[b]) +
                      ": part-1 approximant violates its bound on the boundary of a sector");
    out.delta[b] = d;
    out.angles[b] = geometry::refine_angles(A, d);
  }
  return out;
}

Part3Result part3_correct(InductionState& s, const std::array<PolyFamily, 2>& Ft, const CollarResult& collar,
                          const Part1Result& p1, double seconds_before) {
  auto t_start = std::chrono::steady_clock::now();
  const StepData& st = s.current();
  const RunConfig& cfg = s.config;
  const int n = st.n;
  const double tol = part_tolerance(cfg, n);
  engine::Limits lim{cfg.max_degree, cfg.fit_density, cfg.validation_density};
  lim.stop_on_stall = cfg.stop_on_stall;
  const std::size_t M = s.grid.size();

  StepData next;
  next.n = n + 1;
  next.angles = collar.angles;
  for (int i = 0; i < 2; ++i) {
    next.F[i].grid = s.grid;
    next.F[i].polys.resize(M);
  }
  Part3Result res;
  res.fits.resize(2 * M);
  parallel_for(2 * M, [&](std::size_t task) {
    std::size_t b = task / 2;
    int c = static_cast<int>(task % 2);
    bool odd = c == 0;
    const Poly& f = Ft[c].polys[b];
    const auto& A = st.angles[b];
    const auto& An = collar.angles[b];
    const double d = collar.delta[b];
    auto pieces = geometry::decompose_annulus(n, A, d);
    const Region& W = odd ? pieces.w_odd : pieces.w_even;
    const Region& Lown = odd ? pieces.l_odd : pieces.l_even;
    const Region& Loth = odd ? pieces.l_even : pieces.l_odd;
    // angular ranges of the other parity's blocks, where the target is n+2
    auto in_other_block = [&](cplx z) {
      double phi = geometry::polar_angle(z);
      for (std::size_t j = odd ? 1 : 0; j + 1 < A.size(); j += 2)
        if (geometry::angle_in(phi, A[j] + d, A[j + 1] - d)) return true;
      return false;
    };
    const double top = n + 2.0;
    auto build = [&](const engine::Sampling& S) {
      engine::OneSidedProblem P;
      for (auto z : S.points(geometry::disk(n))) P.budget.add(z, f(z), tol);
      for (auto z : S.points(W)) {
        cplx v = f(z);
        P.soft.add(z, v, cfg.soft_tolerance);
        P.lower.add(z, n, goal(cfg, v.real(), n));
      }
      for (auto z : S.points(Lown)) P.soft.add(z, f(z), cfg.soft_tolerance);
      for (auto z : S.points(Loth)) {
        P.soft.add(z, top, cfg.soft_tolerance);
        P.lower.add(z, n, goal(cfg, top, n));
      }
      for (auto z : S.points(geometry::alpha(n + 1, An, odd))) {
        double v = in_other_block(z) ? top : f(z).real();
        P.lower.add(z, n + 1, goal(cfg, v, n + 1));
      }
      add_cap(P, S, n, cfg.growth_cap);
      return P;
    };
    auto t0 = std::chrono::steady_clock::now();
    auto [P, rep] = engine::approximate_one_sided(build, n + 1.0, lim, b);
    next.F[c].polys[b] = P;
    res.fits[task] = FitRecord{n, 3, c + 1, s.grid.labels[b], rep, seconds_since(t0)};
  });

  StepCertificate cert;
  cert.n = n + 1;
  cert.budget = step_budget(cfg, n + 1);
  cert.density = cfg.validation_density;
  cert.per_b.resize(M);
  std::ostringstream failures;
  for (std::size_t b = 0; b < M; ++b) {
    ParamCertificate pc = measure(next, &st, b, cert.density);
    pc.delta = collar.delta[b];
    for (const auto& fr : p1.fits)
      if (fr.b == s.grid.labels[b]) pc.degrees[fr.component - 1] = fr.report.degree;
    for (const auto& fr : res.fits)
      if (fr.b == s.grid.labels[b]) pc.degrees[2 + fr.component - 1] = fr.report.degree;
    if (!(pc.convergence < cert.budget))
      failures << " convergence " << pc.convergence << " >= " << cert.budget << " at b=" << s.grid.labels[b] << ";";
    if (!(pc.growth > n)) failures << " growth " << pc.growth << " <= " << n << " at b=" << s.grid.labels[b] << ";";
    if (!(pc.arc_odd > n + 1) || !(pc.arc_even > n + 1))
      failures << " arc minima (" << pc.arc_odd << ", " << pc.arc_even << ") <= " << n + 1 << " at b="
               << s.grid.labels[b] << ";";
    cert.per_b[b] = pc;
  }
  if (!failures.str().empty())
    throw Error(ErrorCode::certificate_failed, "step " + std::to_string(n + 1) + " rejected:" + failures.str());
  cert.seconds = seconds_before + seconds_since(t_start);
  s.steps.push_back(std::move(next));
  s.ledger.push_back(std::move(cert));
  return res;
}

RunResult run(const RunConfig& config, const Progress& progress) {
  RunResult out;
  auto t_init = std::chrono::steady_clock::now();
  try {
    out.state = init(config);
  } catch (const Error& e) {
    out.error = e.what();
    out.error_code = static_cast<int>(e.code());
    return out;
  }
  out.step_seconds.push_back(seconds_since(t_init));
  report(progress, "step 1: seed certified");
  for (int n = 1; n < config.steps; ++n) {
    auto t0 = std::chrono::steady_clock::now();
    std::string stage = "segment extension";
    try {
      auto targets = extend_along_segments(out.state);
      stage = "part 1";
      auto p1 = part1_approximate(out.state, targets);
      out.fits.insert(out.fits.end(), p1.fits.begin(), p1.fits.end());
      stage = "collar";
      auto collar = compute_collar_delta(out.state, p1.Ft);
      {
        std::ostringstream os;
        os << "step " << n << "->" << n + 1 << ": part 1 done, collar width";
        for (double d : collar.delta) os << ' ' << d;
        report(progress, os.str());
      }
      stage = "part 3";
      auto p3 = part3_correct(out.state, p1.Ft, collar, p1, seconds_since(t0));
      out.fits.insert(out.fits.end(), p3.fits.begin(), p3.fits.end());
    } catch (const NoConvergence& e) {
      std::ostringstream os;
      os << "step " << n << "->" << n + 1 << " aborted in " << stage << " (b=" << out.state.grid.labels[e.b_index]
         << "): " << e.what();
      out.error = os.str();
      out.error_code = static_cast<int>(e.code());
      return out;
    } catch (const Error& e) {
      out.error = "step " + std::to_string(n) + "->" + std::to_string(n + 1) + " aborted in " + stage + ": " + e.what();
      out.error_code = static_cast<int>(e.code());
      return out;
    }
    out.step_seconds.push_back(seconds_since(t0));
    report(progress, "step " + std::to_string(n + 1) + " certified");
  }
  // Growth of each map alone is not enough: F(b,z) = b*z is proper for b != 0 but
  // the family is not proper at b = 0. Only the fiberwise max of the pair is checked.
  const StepData& last = out.state.current();
  const int N = last.n;
  for (std::size_t b = 0; b < out.state.grid.size(); ++b) {
    std::vector<double> row;
    for (int m = 1; m <= N; ++m) {
      double g = growth_minimum(last.F[0].polys[b], last.F[1].polys[b], m, config.validation_density);
      row.push_back(g);
      if (!(g > m - 2)) {
        out.error = "final pair fails the growth bound on annulus " + std::to_string(m);
        out.error_code = static_cast<int>(ErrorCode::certificate_failed);
      }
    }
    out.final_growth.push_back(row);
  }
  out.ok = out.error.empty();
  return out;
}

Evaluation evaluate(const InductionState& s, std::size_t b, cplx z) {
  if (b >= s.grid.size()) throw Error(ErrorCode::domain, "parameter index outside the grid");
  const StepData& st = s.current();
  Evaluation e;
  e.f1 = st.F[0].polys[b](z);
  e.f2 = st.F[1].polys[b](z);
  const int N = st.n;
  e.disk_index = std::max(0, static_cast<int>(std::ceil(std::abs(z) - geometry::boundary_slack)));
  e.certified = e.disk_index <= N;
  if (e.certified) e.tail_bound = step_budget(s.config, N);
  return e;
}

std::array<double, 2> harmonic_map(const InductionState& s, std::size_t b, cplx z) {
  auto e = evaluate(s, b, z);
  return {e.f1.real(), e.f2.real()};
}

}  // namespace propermap::driver
