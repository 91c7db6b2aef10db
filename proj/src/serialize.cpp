#include "serialize.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "errors.hpp"

namespace propermap::io {

using driver::InductionState;
using driver::RunConfig;
using geometry::cplx;

std::string real_str(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double real_from(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "nan") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    double v = 0.0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw Error(ErrorCode::state, "malformed real '" + s + "'");
    return v;
  }
  throw Error(ErrorCode::state, "expected a real number");
}

static json cplx_json(cplx z) { return json::array({real_str(z.real()), real_str(z.imag())}); }
static cplx cplx_from(const json& j) {
  if (j.is_array() && j.size() == 2) return {real_from(j[0]), real_from(j[1])};
  return {real_from(j), 0.0};
}

json config_to_json(const RunConfig& c) {
  json j;
  j["steps"] = c.steps;
  j["param_grid"] = json::array();
  for (double b : c.param_grid) j["param_grid"].push_back(real_str(b));
  if (c.seeds.size() == 1) {
    j["seed"] = cplx_json(c.seeds[0]);
  } else {
    j["seed"] = json::array();
    for (auto z : c.seeds) j["seed"].push_back(cplx_json(z));
  }
  j["budget_scale"] = real_str(c.budget_scale);
  j["max_degree"] = c.max_degree;
  j["fit_density"] = real_str(c.fit_density);
  j["validation_density"] = real_str(c.validation_density);
  j["minorant_rho"] = real_str(c.minorant_rho);
  j["delta_cap_fraction"] = real_str(c.delta_cap_fraction);
  j["soft_tolerance"] = real_str(c.soft_tolerance);
  j["margin_goal_fraction"] = real_str(c.margin_goal_fraction);
  j["margin_goal_cap"] = real_str(c.margin_goal_cap);
  j["collar_target_fraction"] = real_str(c.collar_target_fraction);
  j["growth_cap"] = real_str(c.growth_cap);
  j["stop_on_stall"] = c.stop_on_stall;
  j["output_dir"] = c.output_dir;
  return j;
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  try {
    if (!j.is_object()) throw Error(ErrorCode::config, "config must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
      static const char* known[] = {"steps", "param_grid", "seed", "budget_scale", "max_degree", "fit_density",
                                    "validation_density", "minorant_rho", "delta_cap_fraction", "soft_tolerance",
                                    "margin_goal_fraction", "margin_goal_cap", "collar_target_fraction", "growth_cap", "stop_on_stall",
                                    "output_dir"};
      if (std::none_of(std::begin(known), std::end(known), [&](const char* k) { return it.key() == k; }))
        throw Error(ErrorCode::config, "unknown config key '" + it.key() + "'");
    }
    if (j.contains("steps")) c.steps = j.at("steps").get<int>();
    if (j.contains("param_grid")) {
      c.param_grid.clear();
      for (const auto& b : j.at("param_grid")) c.param_grid.push_back(real_from(b));
    }
    if (j.contains("seed")) {
      const auto& s = j.at("seed");
      c.seeds.clear();
      bool pair = s.is_array() && s.size() == 2 && !s[0].is_array() && !s[1].is_array();
      if (!s.is_array() || pair) {
        c.seeds.push_back(cplx_from(s));
      } else {
        for (const auto& z : s) c.seeds.push_back(cplx_from(z));
      }
    }
    auto real_key = [&](const char* k, double& v) {
      if (j.contains(k)) v = real_from(j.at(k));
    };
    real_key("budget_scale", c.budget_scale);
    if (j.contains("max_degree")) c.max_degree = j.at("max_degree").get<int>();
    real_key("fit_density", c.fit_density);
    real_key("validation_density", c.validation_density);
    real_key("minorant_rho", c.minorant_rho);
    real_key("delta_cap_fraction", c.delta_cap_fraction);
    real_key("soft_tolerance", c.soft_tolerance);
    real_key("margin_goal_fraction", c.margin_goal_fraction);
    real_key("margin_goal_cap", c.margin_goal_cap);
    real_key("collar_target_fraction", c.collar_target_fraction);
    real_key("growth_cap", c.growth_cap);
    if (j.contains("stop_on_stall")) c.stop_on_stall = j.at("stop_on_stall").get<bool>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::config, std::string("malformed config: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::config, e.what());
  }
  try {
    driver::validate(c);
  } catch (const Error& e) {
    throw Error(ErrorCode::config, e.what());
  }
  return c;
}

json poly_to_json(const engine::Poly& p) {
  json j;
  j["scale"] = real_str(p.scale);
  j["coeffs"] = json::array();
  for (auto c : p.coeffs) j["coeffs"].push_back(cplx_json(c));
  return j;
}

engine::Poly poly_from_json(const json& j) {
  engine::Poly p;
  p.scale = real_from(j.at("scale"));
  p.coeffs.clear();
  for (const auto& c : j.at("coeffs")) p.coeffs.push_back(cplx_from(c));
  if (p.coeffs.empty() || !(p.scale > 0.0)) throw Error(ErrorCode::state, "malformed polynomial");
  for (auto c : p.coeffs)
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) throw Error(ErrorCode::state, "non-finite coefficient");
  return p;
}

static json certificate_json(const driver::StepCertificate& c, const families::ParamGrid& g) {
  json j;
  j["n"] = c.n;
  j["budget"] = real_str(c.budget);
  j["density"] = real_str(c.density);
  j["seconds"] = real_str(c.seconds);
  j["per_b"] = json::array();
  for (std::size_t b = 0; b < c.per_b.size(); ++b) {
    const auto& p = c.per_b[b];
    json e;
    e["b"] = real_str(g.labels[b]);
    e["convergence"] = real_str(p.convergence);
    e["growth"] = real_str(p.growth);
    e["arc_odd"] = real_str(p.arc_odd);
    e["arc_even"] = real_str(p.arc_even);
    e["delta"] = real_str(p.delta);
    e["degrees"] = p.degrees;
    e["coeff_energy"] = json::array({real_str(p.coeff_energy[0]), real_str(p.coeff_energy[1])});
    e["circle_value"] = json::array({cplx_json(p.circle_value[0]), cplx_json(p.circle_value[1])});
    j["per_b"].push_back(e);
  }
  return j;
}

static driver::StepCertificate certificate_from(const json& j) {
  driver::StepCertificate c;
  c.n = j.at("n").get<int>();
  c.budget = real_from(j.at("budget"));
  c.density = real_from(j.at("density"));
  c.seconds = real_from(j.at("seconds"));
  for (const auto& e : j.at("per_b")) {
    driver::ParamCertificate p;
    p.convergence = real_from(e.at("convergence"));
    p.growth = real_from(e.at("growth"));
    p.arc_odd = real_from(e.at("arc_odd"));
    p.arc_even = real_from(e.at("arc_even"));
    p.delta = real_from(e.at("delta"));
    p.degrees = e.at("degrees").get<std::array<int, 4>>();
    for (int i = 0; i < 2; ++i) {
      p.coeff_energy[i] = real_from(e.at("coeff_energy").at(i));
      p.circle_value[i] = cplx_from(e.at("circle_value").at(i));
    }
    c.per_b.push_back(p);
  }
  return c;
}

json state_to_json(const InductionState& s) {
  json j;
  j["format"] = "propermap-state";
  j["version"] = kVersion;
  j["config"] = config_to_json(s.config);
  j["grid"] = json::array();
  for (double b : s.grid.labels) j["grid"].push_back(real_str(b));
  j["steps"] = json::array();
  for (const auto& st : s.steps) {
    json sj;
    sj["n"] = st.n;
    sj["l"] = geometry::l_index(st.n);
    sj["angles"] = json::array();
    for (const auto& A : st.angles) {
      json a = json::array();
      for (double v : A) a.push_back(real_str(v));
      sj["angles"].push_back(a);
    }
    for (int i = 0; i < 2; ++i) {
      json fam = json::array();
      for (const auto& p : st.F[i].polys) fam.push_back(poly_to_json(p));
      sj[i == 0 ? "F1" : "F2"] = fam;
    }
    j["steps"].push_back(sj);
  }
  j["ledger"] = json::array();
  for (const auto& c : s.ledger) j["ledger"].push_back(certificate_json(c, s.grid));
  return j;
}

InductionState state_from_json(const json& j) {
  InductionState s;
  try {
    if (j.value("format", std::string()) != "propermap-state") throw Error(ErrorCode::state, "not a propermap state file");
    s.config = config_from_json(j.at("config"));
    for (const auto& b : j.at("grid")) s.grid.labels.push_back(real_from(b));
    families::validate(s.grid);
    const std::size_t M = s.grid.size();
    for (const auto& sj : j.at("steps")) {
      driver::StepData st;
      st.n = sj.at("n").get<int>();
      for (const auto& a : sj.at("angles")) {
        std::vector<double> A;
        for (const auto& v : a) A.push_back(real_from(v));
        st.angles.push_back(A);
      }
      for (int i = 0; i < 2; ++i) {
        st.F[i].grid = s.grid;
        for (const auto& p : sj.at(i == 0 ? "F1" : "F2")) st.F[i].polys.push_back(poly_from_json(p));
        if (st.F[i].polys.size() != M) throw Error(ErrorCode::state, "polynomial count differs from grid size");
      }
      if (st.angles.size() != M) throw Error(ErrorCode::state, "angle array count differs from grid size");
      s.steps.push_back(std::move(st));
    }
    for (const auto& c : j.at("ledger")) s.ledger.push_back(certificate_from(c));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::state, std::string("corrupt state: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::state) throw;
    throw Error(ErrorCode::state, std::string("corrupt state: ") + e.what());
  }
  if (s.steps.empty()) throw Error(ErrorCode::state, "state holds no steps");
  for (std::size_t k = 0; k < s.steps.size(); ++k)
    if (s.steps[k].n != static_cast<int>(k) + 1) throw Error(ErrorCode::state, "steps must be numbered 1, 2, ...");
  return s;
}

json manifest_json(const driver::RunResult& r) {
  json j;
  j["tool"] = "propermap";
  j["version"] = kVersion;
  j["config"] = config_to_json(r.state.config);
  j["ok"] = r.ok;
  j["error"] = r.error;
  j["completed_steps"] = r.state.n();
  j["tail_bound"] = r.state.n() > 0 ? real_str(driver::step_budget(r.state.config, r.state.n())) : "nan";
  j["certificates"] = json::array();
  for (const auto& c : r.state.ledger) j["certificates"].push_back(certificate_json(c, r.state.grid));
  j["final_growth"] = json::array();
  for (std::size_t b = 0; b < r.final_growth.size(); ++b) {
    json row;
    row["b"] = real_str(r.state.grid.labels[b]);
    row["min_max_re_by_annulus"] = json::array();
    for (double g : r.final_growth[b]) row["min_max_re_by_annulus"].push_back(real_str(g));
    j["final_growth"].push_back(row);
  }
  j["engine_reports"] = json::array();
  for (const auto& f : r.fits) {
    json e;
    e["step"] = f.step;
    e["part"] = f.part;
    e["component"] = f.component;
    e["b"] = real_str(f.b);
    e["degree"] = f.report.degree;
    e["lp_ratio"] = real_str(f.report.lp_ratio);
    e["budget_ratio"] = real_str(f.report.budget_ratio);
    e["soft_ratio"] = real_str(f.report.soft_ratio);
    e["lower_margin"] = real_str(f.report.lower_margin);
    e["seconds"] = real_str(f.seconds);
    e["history"] = json::array();
    for (const auto& h : f.report.history)
      e["history"].push_back({{"degree", h.degree},
                              {"lp_ratio", real_str(h.lp_ratio)},
                              {"budget_ratio", real_str(h.budget_ratio)},
                              {"soft_ratio", real_str(h.soft_ratio)},
                              {"lower_margin", real_str(h.lower_margin)}});
    j["engine_reports"].push_back(e);
  }
  j["step_seconds"] = json::array();
  for (double t : r.step_seconds) j["step_seconds"].push_back(real_str(t));
  j["validation_spacing"] = real_str(2.0 / r.state.config.validation_density);
  return j;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::io, "cannot parse '" + path + "': " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorCode::io, "write failed for '" + path + "'");
}

void write_samples_csv(const InductionState& s, std::size_t b, int res, const std::string& path) {
  if (b >= s.grid.size()) throw Error(ErrorCode::domain, "unknown parameter");
  if (res < 1) throw Error(ErrorCode::validation, "grid resolution must be positive");
  const double R = s.n();
  std::ostringstream os;
  os << "b,re_z,im_z,re_F1,im_F1,re_F2,im_F2,re_H1,re_H2\n";
  char line[512];
  for (int i = 0; i < res; ++i)
    for (int k = 0; k < res; ++k) {
      double x = res == 1 ? 0.0 : -R + 2.0 * R * k / (res - 1);
      double y = res == 1 ? 0.0 : -R + 2.0 * R * i / (res - 1);
      auto e = driver::evaluate(s, b, cplx(x, y));
      std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.grid.labels[b], x,
                    y, e.f1.real(), e.f1.imag(), e.f2.real(), e.f2.imag(), e.f1.real(), e.f2.real());
      os << line;
    }
  write_text_file(path, os.str());
}

namespace {

struct Svg {
  std::ostringstream os;
  double size, scale, c;
  Svg(double world_radius, double px = 640.0) : size(px), scale(0.45 * px / world_radius), c(0.5 * px) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px << "\" height=\"" << px << "\" viewBox=\"0 0 "
       << px << ' ' << px << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  }
  void path(const geometry::Region& r, const std::string& id, const std::string& fill, const std::string& stroke) {
    os << "<path id=\"" << id << "\" d=\"" << geometry::svg_path(r, scale, c, c) << "\" fill=\"" << fill
       << "\" fill-rule=\"nonzero\" stroke=\"" << stroke << "\" stroke-width=\"1\"/>\n";
  }
  std::string finish() {
    os << "</svg>\n";
    return os.str();
  }
};

}  // namespace

std::string regions_svg(const InductionState& s, int n) {
  if (n < 1 || n > s.n()) throw Error(ErrorCode::validation, "render step must lie in 1..N");
  const auto& A = s.steps[n - 1].angles[0];
  Svg svg(n + 1.2);
  svg.path(geometry::disk(n), "K", "#eeeeee", "#888888");
  double delta = n < s.n() ? s.ledger[n].per_b[0].delta : driver::kNaN;
  if (std::isfinite(delta)) {
    auto p = geometry::decompose_annulus(n, A, delta);
    svg.path(p.w_odd, "W_odd", "#9ecae1", "#3182bd");
    svg.path(p.l_odd, "L_odd", "#3182bd", "#08519c");
    svg.path(p.w_even, "W_even", "#fdae6b", "#e6550d");
    svg.path(p.l_even, "L_even", "#e6550d", "#a63603");
  } else {
    svg.path(geometry::odd_union(geometry::Kind::sector, n, 0.0, A), "D_odd", "#9ecae1", "#3182bd");
    svg.path(geometry::even_union(geometry::Kind::sector, n, 0.0, A), "D_even", "#fdae6b", "#e6550d");
  }
  std::vector<double> inner(A.begin(), A.end() - 1);
  svg.path(geometry::gamma(n, inner), "gamma", "none", "black");
  svg.path(geometry::points(n, inner), "points_inner", "black", "black");
  svg.path(geometry::points(n + 1, inner), "points_outer", "white", "black");
  return svg.finish();
}

std::string growth_svg(const InductionState& s, int n) {
  if (n < 1 || n > s.n()) throw Error(ErrorCode::validation, "render step must lie in 1..N");
  const auto& st = s.current();
  const int cells = 120;
  std::vector<double> v(cells * cells, NAN);
  double lo = INFINITY, hi = -INFINITY;
  auto at = [&](int i, int k) { return cplx(-n + (k + 0.5) * 2.0 * n / cells, n - (i + 0.5) * 2.0 * n / cells); };
  for (int i = 0; i < cells; ++i)
    for (int k = 0; k < cells; ++k) {
      cplx z = at(i, k);
      if (std::abs(z) > n) continue;
      double m = std::max(st.F[0].polys[0](z).real(), st.F[1].polys[0](z).real());
      v[i * cells + k] = m;
      lo = std::min(lo, m);
      hi = std::max(hi, m);
    }
  Svg svg(n * 1.05);
  double px = 2.0 * n / cells * svg.scale;
  char buf[256];
  for (int i = 0; i < cells; ++i)
    for (int k = 0; k < cells; ++k) {
      double m = v[i * cells + k];
      if (std::isnan(m)) continue;
      double t = hi > lo ? (m - lo) / (hi - lo) : 0.5;
      int r = static_cast<int>(255 * (0.2 + 0.8 * t)), g = static_cast<int>(255 * (0.3 + 0.5 * t)),
          bl = static_cast<int>(255 * (0.9 - 0.6 * t));
      cplx z = at(i, k);
      std::snprintf(buf, sizeof buf, "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"rgb(%d,%d,%d)\"/>\n",
                    svg.c + svg.scale * z.real() - 0.5 * px, svg.c - svg.scale * z.imag() - 0.5 * px, px + 0.05,
                    px + 0.05, r, g, bl);
      svg.os << buf;
    }
  const double level = n - 1;
  svg.os << "<g id=\"contour\" fill=\"black\">\n";
  for (int i = 0; i + 1 < cells; ++i)
    for (int k = 0; k + 1 < cells; ++k) {
      double a = v[i * cells + k], b = v[i * cells + k + 1], c = v[(i + 1) * cells + k];
      if (std::isnan(a) || std::isnan(b) || std::isnan(c)) continue;
      if ((a - level) * (b - level) < 0 || (a - level) * (c - level) < 0) {
        cplx z = at(i, k);
        std::snprintf(buf, sizeof buf, "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\"/>\n",
                      svg.c + svg.scale * z.real(), svg.c - svg.scale * z.imag(), px, px);
        svg.os << buf;
      }
    }
  svg.os << "</g>\n";
  svg.path(geometry::disk(n), "K", "none", "black");
  return svg.finish();
}

std::string region_catalog_svg(int n) {
  if (n < 1) throw Error(ErrorCode::validation, "region index must be at least 1");
  using namespace geometry;
  const double pi = std::numbers::pi;
  std::vector<double> A{0.0, pi, two_pi};
  Svg svg(n + 1.2);
  svg.path(disk(n), "disk", "#f0f0f0", "#999999");
  svg.path(sector(n, 0.1, 0.9), "sector", "#c6dbef", "#3182bd");
  svg.path(lblock(n, 0.1, 1.1, 1.9), "lblock", "#3182bd", "#08519c");
  svg.path(wblock(n, 0.1, 2.1, 2.9), "wblock", "#fdae6b", "#e6550d");
  svg.path(arc(n, 3.1, 3.9), "arc", "none", "#31a354");
  svg.path(gamma(n, {4.2, 4.4}), "gamma", "none", "black");
  svg.path(points(n + 1, {4.8, 5.0}), "points", "black", "black");
  svg.path(odd_union(Kind::arc, n + 1, 0.0, A), "odd_union", "none", "#756bb1");
  svg.path(even_union(Kind::arc, n + 1, 0.0, A), "even_union", "none", "#de2d26");
  svg.path(union_of({sector(n, 5.3, 5.7), gamma(n, {6.0})}), "union", "#d9d9d9", "#636363");
  return svg.finish();
}

}  // namespace propermap::io
