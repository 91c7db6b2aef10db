#include "families.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "errors.hpp"

namespace propermap::families {

void validate(const ParamGrid& g) {
  if (g.labels.empty()) throw Error(ErrorCode::validation, "parameter grid is empty");
  for (std::size_t i = 0; i < g.labels.size(); ++i) {
    if (!std::isfinite(g.labels[i])) throw Error(ErrorCode::validation, "parameter labels must be finite");
    if (i > 0 && !(g.labels[i] > g.labels[i - 1]))
      throw Error(ErrorCode::validation, "parameter labels must be strictly increasing");
  }
}

std::optional<std::size_t> index_of(const ParamGrid& g, double b, double tol) {
  for (std::size_t i = 0; i < g.labels.size(); ++i)
    if (std::fabs(g.labels[i] - b) <= tol) return i;
  return std::nullopt;
}

CompactFamily constant_family(const ParamGrid& g, const Region& r) {
  CompactFamily f;
  f.grid = g;
  f.fibers.assign(g.size(), r.kind == geometry::Kind::empty ? std::nullopt : std::optional<Region>(r));
  f.wide = r.kind != geometry::Kind::empty;
  return f;
}

CompactFamily per_param_family(const ParamGrid& g, std::vector<std::optional<Region>> fibers) {
  if (fibers.size() != g.size()) throw Error(ErrorCode::grid_mismatch, "one fiber per parameter required");
  CompactFamily f;
  f.grid = g;
  f.fibers = std::move(fibers);
  f.wide = std::all_of(f.fibers.begin(), f.fibers.end(), [](const auto& r) { return r.has_value(); });
  return f;
}

CompactFamily union_families(const CompactFamily& f1, const CompactFamily& f2) {
  if (!(f1.grid == f2.grid)) throw Error(ErrorCode::grid_mismatch, "union of families over different grids");
  CompactFamily u;
  u.grid = f1.grid;
  u.wide = true;
  for (std::size_t i = 0; i < f1.grid.size(); ++i) {
    const auto& a = f1.fibers[i];
    const auto& b = f2.fibers[i];
    if (!a && !b) {
      u.fibers.push_back(std::nullopt);
      u.wide = false;
      continue;
    }
    Region r = !a ? *b : !b ? *a : geometry::union_of({*a, *b});
    u.fibers.push_back(std::move(r));
  }
  return u;
}

FamilyReport is_valid_proper_family(const CompactFamily& f) {
  FamilyReport rep;
  for (std::size_t i = 0; i < f.fibers.size(); ++i) {
    double b = i < f.grid.size() ? f.grid.labels[i] : std::nan("");
    const auto& r = f.fibers[i];
    if (!r) {
      rep.wide = false;
      if (f.wide) {
        rep.valid = false;
        rep.failing_b.push_back(b);
        rep.messages.push_back("empty fiber in a family flagged wide");
      }
      continue;
    }
    try {
      geometry::validate(*r);
    } catch (const Error& e) {
      rep.valid = false;
      rep.failing_b.push_back(b);
      rep.messages.push_back(e.what());
    }
  }
  if (f.fibers.size() != f.grid.size()) {
    rep.valid = false;
    rep.messages.push_back("fiber count differs from grid size");
  }
  return rep;
}

bool runge_raster_check(const Region& r, int na, int per_unit) {
  double R = geometry::outer_radius(r) + 1.0;
  int nr = std::max(8, static_cast<int>(std::ceil(R * per_unit)));
  double dr = R / nr, dt = geometry::two_pi / na;
  std::vector<std::uint8_t> occ(static_cast<std::size_t>(nr) * na, 0);
  auto cell = [&](int i, int j) -> std::uint8_t& { return occ[static_cast<std::size_t>(i) * na + j]; };
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < na; ++j)
      if (geometry::contains(r, std::polar((i + 0.5) * dr, (j + 0.5) * dt))) cell(i, j) = 1;
  // zero-area pieces mark every cell they cross
  auto s = geometry::sample(r, 2.0 * std::max(na / geometry::two_pi, 1.0 * per_unit),
                            geometry::is_curve_kind(r) ? geometry::SampleMode::curve : geometry::SampleMode::boundary);
  for (auto z : s.pts) {
    int i = std::min(nr - 1, static_cast<int>(std::abs(z) / dr));
    int j = std::min(na - 1, static_cast<int>(geometry::polar_angle(z) / dt));
    cell(i, j) = 1;
  }
  std::vector<std::uint8_t> seen(occ.size(), 0);
  std::deque<std::pair<int, int>> q;
  for (int j = 0; j < na; ++j)
    if (!cell(nr - 1, j)) {
      seen[static_cast<std::size_t>(nr - 1) * na + j] = 1;
      q.emplace_back(nr - 1, j);
    }
  bool centre_reached = false;
  while (!q.empty()) {
    auto [i, j] = q.front();
    q.pop_front();
    std::vector<std::pair<int, int>> nb{{i, (j + 1) % na}, {i, (j + na - 1) % na}};
    if (i + 1 < nr) nb.emplace_back(i + 1, j);
    if (i > 0) nb.emplace_back(i - 1, j);
    if (i == 0 && !centre_reached) {
      // cells touching the origin are mutually adjacent
      centre_reached = true;
      for (int k = 0; k < na; ++k) nb.emplace_back(0, k);
    }
    for (auto [a, b] : nb) {
      std::size_t k = static_cast<std::size_t>(a) * na + b;
      if (!occ[k] && !seen[k]) {
        seen[k] = 1;
        q.emplace_back(a, b);
      }
    }
  }
  for (std::size_t k = 0; k < occ.size(); ++k)
    if (!occ[k] && !seen[k]) return false;
  return true;
}

void certify_runge(CompactFamily& f) {
  f.runge = f.wide && std::all_of(f.fibers.begin(), f.fibers.end(),
                                  [](const auto& r) { return r && runge_raster_check(*r); });
}

PerParamReal min_over_fibers(const Evaluator& eta, const CompactFamily& f, double density) {
  PerParamReal out(f.grid.size(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < f.grid.size(); ++i) {
    if (!f.fibers[i]) throw Error(ErrorCode::domain, "minimum over an empty fiber");
    auto s = geometry::sample_natural(*f.fibers[i], density);
    for (auto z : s.pts) {
      double v = eta(i, z);
      if (!(v > 0.0))
        throw Error(ErrorCode::domain, "non-positive function value " + std::to_string(v) + " on fiber " +
                                           std::to_string(f.grid.labels[i]));
      out[i] = std::min(out[i], v);
    }
  }
  return out;
}

PerParamReal continuous_minorant(const PerParamReal& mins, double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw Error(ErrorCode::validation, "minorant safety factor must lie in (0, 1)");
  PerParamReal m(mins.size());
  for (std::size_t i = 0; i < mins.size(); ++i) {
    if (!(mins[i] > 0.0) || !std::isfinite(mins[i]))
      throw Error(ErrorCode::domain, "minorant requires positive finite minima");
    m[i] = (1.0 - rho) * mins[i];
  }
  return m;
}

nlohmann::json to_json(const CompactFamily& f) {
  auto arr = nlohmann::json::array();
  for (std::size_t i = 0; i < f.grid.size(); ++i) {
    nlohmann::json rec;
    rec["b"] = f.grid.labels[i];
    rec["region"] = f.fibers[i] ? geometry::to_json(*f.fibers[i]) : geometry::to_json(geometry::empty());
    arr.push_back(rec);
  }
  return arr;
}

CompactFamily family_from_json(const nlohmann::json& j) {
  ParamGrid g;
  std::vector<std::optional<Region>> fibers;
  for (const auto& rec : j) {
    g.labels.push_back(rec.at("b").get<double>());
    Region r = geometry::region_from_json(rec.at("region"));
    fibers.push_back(r.kind == geometry::Kind::empty ? std::nullopt : std::optional<Region>(r));
  }
  validate(g);
  return per_param_family(g, std::move(fibers));
}

}  // namespace propermap::families
