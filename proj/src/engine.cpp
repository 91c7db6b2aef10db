#include "engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "errors.hpp"
#include "lp.hpp"
#include "parallel.hpp"

namespace propermap::engine {

using geometry::two_pi;

cplx Poly::operator()(cplx z) const {
  cplx w = z / scale, acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * w + *it;
  return acc;
}

cplx Poly::power_sum(cplx z) const {
  cplx w = z / scale, acc = 0.0;
  for (std::size_t k = 0; k < coeffs.size(); ++k) acc += coeffs[k] * std::pow(w, static_cast<int>(k));
  return acc;
}

ArnoldiBasis fit_basis(const std::vector<cplx>& samples, int degree, double scale, const std::vector<double>& weights) {
  const Eigen::Index M = static_cast<Eigen::Index>(samples.size());
  if (degree < 0) throw Error(ErrorCode::validation, "negative degree");
  if (M < 3 * (degree + 1))
    throw Error(ErrorCode::too_few_samples, "need at least 3(d+1) = " + std::to_string(3 * (degree + 1)) +
                                                " samples, got " + std::to_string(M));
  if (!(scale > 0.0)) {
    scale = 0.0;
    for (auto z : samples) scale = std::max(scale, std::abs(z));
    if (scale == 0.0) scale = 1.0;
  }
  ArnoldiBasis B;
  B.scale = scale;
  B.weights = Eigen::VectorXd::Ones(M);
  if (!weights.empty()) {
    if (static_cast<Eigen::Index>(weights.size()) != M) throw Error(ErrorCode::validation, "weight count mismatch");
    for (Eigen::Index i = 0; i < M; ++i) B.weights[i] = weights[i];
  }
  Eigen::VectorXd wn = B.weights / B.weights.sum();
  Eigen::VectorXcd w(M);
  for (Eigen::Index i = 0; i < M; ++i) w[i] = samples[i] / scale;

  B.Q.resize(M, degree + 1);
  B.H = Eigen::MatrixXcd::Zero(degree + 1, degree);
  B.Q.col(0).setOnes();
  for (int k = 0; k < degree; ++k) {
    Eigen::VectorXcd q = w.cwiseProduct(B.Q.col(k));
    for (int pass = 0; pass < 2; ++pass) {
      Eigen::VectorXcd h = B.Q.leftCols(k + 1).adjoint() * (wn.cast<cplx>().cwiseProduct(q));
      B.H.col(k).head(k + 1) += h;
      q -= B.Q.leftCols(k + 1) * h;
    }
    double nrm = std::sqrt((wn.array() * q.cwiseAbs2().array()).sum());
    if (!(nrm > 1e-14)) throw Error(ErrorCode::rank_deficient, "sample set cannot support degree " + std::to_string(degree));
    B.H(k + 1, k) = nrm;
    B.Q.col(k + 1) = q / nrm;
  }
  Eigen::MatrixXcd G = B.Q.adjoint() * (wn.cast<cplx>().asDiagonal() * B.Q);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G, Eigen::EigenvaluesOnly);
  double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  B.condition = lo > 0 ? std::sqrt(hi / lo) : std::numeric_limits<double>::infinity();
  return B;
}

Eigen::VectorXcd ArnoldiPoly::eval(const std::vector<cplx>& z) const {
  const Eigen::Index M = static_cast<Eigen::Index>(z.size());
  const Eigen::Index d = c.size() - 1;
  Eigen::VectorXcd w(M);
  for (Eigen::Index i = 0; i < M; ++i) w[i] = z[i] / scale;
  Eigen::MatrixXcd W(M, d + 1);
  W.col(0).setOnes();
  for (Eigen::Index k = 0; k < d; ++k) {
    Eigen::VectorXcd q = w.cwiseProduct(W.col(k)) - W.leftCols(k + 1) * H.col(k).head(k + 1);
    W.col(k + 1) = q / H(k + 1, k);
  }
  return W * c;
}

cplx ArnoldiPoly::operator()(cplx z) const { return eval({z})[0]; }

ArnoldiPoly project(const ArnoldiBasis& B, const std::vector<cplx>& values) {
  Eigen::VectorXd wn = B.weights / B.weights.sum();
  Eigen::VectorXcd f(static_cast<Eigen::Index>(values.size()));
  for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = values[i] * wn[i];
  return ArnoldiPoly{B.scale, B.H, B.Q.adjoint() * f};
}

Poly to_monomial(const ArnoldiPoly& p) {
  const int d = static_cast<int>(p.c.size()) - 1;
  const int M = 2 * (d + 1);
  std::vector<cplx> z(M);
  for (int j = 0; j < M; ++j) z[j] = p.scale * std::polar(1.0, two_pi * j / M);
  Eigen::VectorXcd v = p.eval(z);
  Poly out;
  out.scale = p.scale;
  out.coeffs.assign(d + 1, cplx(0.0));
  for (int k = 0; k <= d; ++k) {
    cplx acc = 0.0;
    for (int j = 0; j < M; ++j) acc += v[j] * std::polar(1.0, -two_pi * static_cast<double>((static_cast<long>(j) * k) % M) / M);
    out.coeffs[k] = acc / static_cast<double>(M);
  }
  return out;
}

cplx PiecewiseTarget::operator()(std::size_t b, cplx z) const {
  for (const auto& p : pieces)
    if (p.family.fibers[b] && geometry::contains(*p.family.fibers[b], z)) return p.eval(b, z);
  throw Error(ErrorCode::domain, "point outside every target piece");
}

std::vector<int> degree_schedule(int max_degree) {
  std::vector<int> out;
  for (int d = 8; d < max_degree; d *= 2) out.push_back(d);
  out.push_back(max_degree);
  return out;
}

void validate(const PiecewiseTarget& t) {
  families::validate(t.grid);
  if (t.pieces.empty()) throw Error(ErrorCode::validation, "target has no pieces");
  for (const auto& p : t.pieces) {
    if (!(p.family.grid == t.grid)) throw Error(ErrorCode::grid_mismatch, "target piece over a different grid");
    if (!p.eval) throw Error(ErrorCode::validation, "target piece without evaluator");
    auto rep = families::is_valid_proper_family(p.family);
    if (!rep.valid) throw Error(ErrorCode::validation, "invalid target piece family");
  }
}

namespace {

struct Samples {
  std::vector<cplx> z, f;
  std::vector<double> w;
};

Samples collect(const PiecewiseTarget& t, std::size_t b, double density, double boundary_weight) {
  Samples s;
  for (const auto& p : t.pieces) {
    if (!p.family.fibers[b]) continue;
    auto ss = geometry::sample_natural(*p.family.fibers[b], density);
    for (std::size_t i = 0; i < ss.size(); ++i) {
      s.z.push_back(ss.pts[i]);
      s.f.push_back(p.eval(b, ss.pts[i]));
      s.w.push_back(ss.on_boundary[i] ? boundary_weight : 1.0);
    }
  }
  return s;
}

void check_limits(const Limits& L) {
  if (!(L.fit_density > 0.0) || !(L.validation_density >= 2.0 * L.fit_density))
    throw Error(ErrorCode::config, "validation density must be at least twice the fit density");
  if (L.max_degree < 1) throw Error(ErrorCode::config, "max_degree must be positive");
}

void check_overlaps(const PiecewiseTarget& t, double density) {
  for (std::size_t b = 0; b < t.grid.size(); ++b)
    for (std::size_t i = 0; i < t.pieces.size(); ++i) {
      if (!t.pieces[i].family.fibers[b]) continue;
      auto s = geometry::sample_natural(*t.pieces[i].family.fibers[b], density);
      for (std::size_t j = i + 1; j < t.pieces.size(); ++j) {
        const auto& fj = t.pieces[j].family.fibers[b];
        if (!fj) continue;
        for (auto z : s.pts)
          if (geometry::contains(*fj, z) && std::abs(t.pieces[i].eval(b, z) - t.pieces[j].eval(b, z)) > 1e-9)
            throw Error(ErrorCode::validation, "target pieces disagree on an overlap");
      }
    }
}

}  // namespace

std::vector<double> measure_sup_error(const PolyFamily& F, const PiecewiseTarget& target, double density) {
  std::vector<double> out(target.grid.size(), 0.0);
  for (std::size_t b = 0; b < target.grid.size(); ++b) {
    auto s = collect(target, b, density, 1.0);
    for (std::size_t i = 0; i < s.z.size(); ++i) out[b] = std::max(out[b], std::abs(F(b, s.z[i]) - s.f[i]));
  }
  return out;
}

std::pair<PolyFamily, ApproxReport> approximate(const PiecewiseTarget& target, const PerParamReal& tol,
                                                const Limits& limits) {
  validate(target);
  check_limits(limits);
  check_overlaps(target, limits.fit_density);
  if (tol.size() != target.grid.size()) throw Error(ErrorCode::grid_mismatch, "one tolerance per parameter required");
  for (double t : tol)
    if (!(t > 0.0)) throw Error(ErrorCode::validation, "tolerances must be positive");

  PolyFamily F;
  F.grid = target.grid;
  F.polys.resize(target.grid.size());
  ApproxReport rep;
  rep.per_b.resize(target.grid.size());

  parallel_for(target.grid.size(), [&](std::size_t b) {
    double fit_density = limits.fit_density;
    Samples fit = collect(target, b, fit_density, limits.boundary_weight);
    Samples val = collect(target, b, limits.validation_density, 1.0);
    double R = 0.0;
    for (auto z : fit.z) R = std::max(R, std::abs(z));
    if (R == 0.0) R = 1.0;
    ParamReport& pr = rep.per_b[b];
    pr.tolerance = tol[b];
    pr.validation_spacing = 2.0 / limits.validation_density;
    double best = std::numeric_limits<double>::infinity();
    int last = 0;
    for (int d : degree_schedule(limits.max_degree)) {
      // high degrees on small pieces need a finer grid; validation keeps its ratio
      for (int grow = 0; static_cast<int>(fit.z.size()) < 3 * (d + 1) && grow < 12; ++grow) {
        fit_density *= 1.5;
        fit = collect(target, b, fit_density, limits.boundary_weight);
        val = collect(target, b, fit_density * limits.validation_density / limits.fit_density, 1.0);
        pr.validation_spacing = 2.0 / (fit_density * limits.validation_density / limits.fit_density);
      }
      if (static_cast<int>(fit.z.size()) < 3 * (d + 1)) break;
      ArnoldiBasis basis = fit_basis(fit.z, d, R, fit.w);
      ArnoldiPoly ap = project(basis, fit.f);
      Poly P = to_monomial(ap);
      Eigen::VectorXcd r = basis.Q * ap.c;
      double res = 0.0;
      for (Eigen::Index i = 0; i < r.size(); ++i) res = std::max(res, std::abs(r[i] - fit.f[i]));
      double err = 0.0;
      for (std::size_t i = 0; i < val.z.size(); ++i) err = std::max(err, std::abs(P(val.z[i]) - val.f[i]));
      pr.history.emplace_back(d, err);
      last = d;
      if (err < best) {
        best = err;
        F.polys[b] = P;
        pr.degree = d;
        pr.sup_error = err;
        pr.fit_residual = res;
        pr.condition = basis.condition;
      }
      if (err < tol[b]) return;
    }
    std::ostringstream os;
    os << "no convergence for b=" << target.grid.labels[b] << ": best sup error " << best << " vs tolerance "
       << tol[b] << " up to degree " << last << " (history:";
    for (auto [d, e] : pr.history) os << " d=" << d << " err=" << e << ";";
    os << ")";
    throw NoConvergence(b, best, last, os.str());
  });
  return {F, rep};
}

std::pair<PolyFamily, ApproxReport> approximate_with_lower_bounds(const PiecewiseTarget& target,
                                                                  const std::vector<LowerBound>& constraints,
                                                                  const PerParamReal& tol, const Limits& limits,
                                                                  double rho) {
  validate(target);
  check_limits(limits);
  PerParamReal delta = tol;
  for (const auto& c : constraints) {
    if (!(c.family.grid == target.grid)) throw Error(ErrorCode::grid_mismatch, "constraint over a different grid");
    if (!c.family.wide) throw Error(ErrorCode::precondition, "constraint family must be wide");
    for (std::size_t b = 0; b < target.grid.size(); ++b) {
      auto s = geometry::sample_natural(*c.family.fibers[b], limits.fit_density);
      for (auto z : s.pts) {
        bool inside = false;
        for (const auto& p : target.pieces)
          if (p.family.fibers[b] && geometry::contains(*p.family.fibers[b], z)) inside = true;
        if (!inside) throw Error(ErrorCode::precondition, "constraint set is not contained in the target's domain");
      }
    }
    PerParamReal mins;
    try {
      mins = families::min_over_fibers([&](std::size_t b, cplx z) { return target(b, z).real() - c.level; },
                                       c.family, limits.fit_density);
    } catch (const Error& e) {
      throw Error(ErrorCode::precondition, std::string("target does not clear its lower bound: ") + e.what());
    }
    auto m = families::continuous_minorant(mins, rho);
    for (std::size_t b = 0; b < delta.size(); ++b) delta[b] = std::min(delta[b], m[b]);
  }
  auto [F, rep] = approximate(target, delta, limits);
  for (std::size_t b = 0; b < target.grid.size(); ++b) {
    for (const auto& c : constraints) {
      auto s = geometry::sample_natural(*c.family.fibers[b], limits.validation_density);
      double margin = std::numeric_limits<double>::infinity();
      for (auto z : s.pts) margin = std::min(margin, F(b, z).real() - c.level);
      rep.per_b[b].margins.push_back(margin);
      if (!(margin > 0.0))
        throw Error(ErrorCode::post_check_failed, "lower bound violated on the validation grid (margin " +
                                                      std::to_string(margin) + "); increase sampling density");
    }
  }
  return {F, rep};
}

// ---------------------------------------------------------------------------

namespace {

const double kOctagon = std::cos(std::numbers::pi / 8.0);

cplx direction(int k) { return std::polar(1.0, -std::numbers::pi / 4.0 * k); }

// Rows of the LP in the Arnoldi coordinates: x = [Re c, Im c, t, u]. Match
// points come first (budget, soft, cap; eight rows each), then the lower
// rows, then u >= 0.
struct RowSystem {
  const Eigen::MatrixXcd& Q;
  const OneSidedProblem& P;
  int d1;
  std::size_t nb, ns, nc, nl;

  std::size_t nm() const { return nb + ns + nc; }
  std::size_t count() const { return 8 * nm() + nl + 1; }
  Eigen::Index t_col() const { return 2 * d1; }
  Eigen::Index u_col() const { return 2 * d1 + 1; }

  // (rows, index within rows, column of its scaling variable or -1)
  std::tuple<const MatchRows*, std::size_t, Eigen::Index> match(std::size_t i) const {
    if (i < nb) return {&P.budget, i, t_col()};
    if (i < nb + ns) return {&P.soft, i - nb, u_col()};
    return {&P.cap, i - nb - ns, -1};
  }

  void fill(std::size_t r, Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row, double& rhs) const {
    row.setZero();
    if (r < 8 * nm()) {
      std::size_t i = r / 8;
      cplx th = direction(static_cast<int>(r % 8));
      auto [m, k, col] = match(i);
      for (int j = 0; j < d1; ++j) {
        cplx v = th * Q(static_cast<Eigen::Index>(i), j);
        row[j] = v.real();
        row[d1 + j] = -v.imag();
      }
      rhs = (th * m->f[k]).real();
      if (col >= 0) row[col] = -m->tol[k] * kOctagon;
      else rhs += m->tol[k] * kOctagon;
    } else if (r < 8 * nm() + nl) {
      std::size_t k = r - 8 * nm();
      Eigen::Index i = static_cast<Eigen::Index>(nm() + k);
      for (int j = 0; j < d1; ++j) {
        row[j] = -Q(i, j).real();
        row[d1 + j] = Q(i, j).imag();
      }
      rhs = -(P.lower.level[k] + P.lower.goal[k]);
    } else {
      row[u_col()] = -1.0;
      rhs = 0.0;
    }
  }

  // Violation of every row at x.
  Eigen::VectorXd violations(const Eigen::VectorXd& x) const {
    Eigen::VectorXcd c = x.head(d1).cast<cplx>() + cplx(0, 1) * x.segment(d1, d1).cast<cplx>();
    Eigen::VectorXcd F = Q * c;
    Eigen::VectorXd v(static_cast<Eigen::Index>(count()));
    for (std::size_t i = 0; i < nm(); ++i) {
      auto [m, k, col] = match(i);
      double s = col >= 0 ? x[col] : 1.0;
      cplx e = F[static_cast<Eigen::Index>(i)] - m->f[k];
      for (int q = 0; q < 8; ++q)
        v[static_cast<Eigen::Index>(8 * i + q)] = (direction(q) * e).real() - s * m->tol[k] * kOctagon;
    }
    for (std::size_t k = 0; k < nl; ++k)
      v[static_cast<Eigen::Index>(8 * nm() + k)] =
          P.lower.level[k] + P.lower.goal[k] - F[static_cast<Eigen::Index>(nm() + k)].real();
    v[static_cast<Eigen::Index>(count() - 1)] = -x[u_col()];
    return v;
  }
};

std::vector<cplx> all_points(const OneSidedProblem& P) {
  std::vector<cplx> z = P.budget.z;
  z.insert(z.end(), P.soft.z.begin(), P.soft.z.end());
  z.insert(z.end(), P.cap.z.begin(), P.cap.z.end());
  z.insert(z.end(), P.lower.z.begin(), P.lower.z.end());
  return z;
}

struct LpFit {
  Eigen::VectorXcd c;
  double t = 0.0;
};

LpFit solve_lp(const ArnoldiBasis& basis, const OneSidedProblem& P) {
  const int d1 = basis.degree() + 1;
  const Eigen::Index nvar = 2 * d1 + 2;
  RowSystem rs{basis.Q, P, d1, P.budget.z.size(), P.soft.z.size(), P.cap.z.size(), P.lower.z.size()};
  const std::size_t npts = rs.nm() + rs.nl;

  std::vector<char> active(rs.count(), 0);
  std::vector<std::size_t> work;
  std::size_t stride = std::max<std::size_t>(1, npts / static_cast<std::size_t>(std::max<Eigen::Index>(1, 3 * d1 / 2)));
  for (std::size_t i = 0; i < npts; i += stride) {
    if (i < rs.nm())
      for (std::size_t q = 0; q < 8; ++q) work.push_back(8 * i + q);
    else
      work.push_back(8 * rs.nm() + (i - rs.nm()));
  }
  work.push_back(rs.count() - 1);
  for (auto r : work) active[r] = 1;

  Eigen::VectorXd cost = Eigen::VectorXd::Zero(nvar);
  cost[rs.t_col()] = 1.0;
  cost[rs.u_col()] = P.soft_weight;
  // the basis is orthonormal in mean square, so |c_j| <= max |F| on the samples
  double scale_f = 1.0;
  for (const MatchRows* m : {&P.budget, &P.soft, &P.cap})
    for (std::size_t k = 0; k < m->z.size(); ++k) scale_f = std::max(scale_f, std::abs(m->f[k]) + (m == &P.cap ? m->tol[k] : 0.0));
  for (double l : P.lower.level) scale_f = std::max(scale_f, std::fabs(l));
  const double box = 1e3 * scale_f;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(nvar);
  for (int round = 0; round < 30; ++round) {
    Eigen::MatrixXd A(static_cast<Eigen::Index>(work.size()), nvar);
    Eigen::VectorXd b(static_cast<Eigen::Index>(work.size()));
    for (std::size_t k = 0; k < work.size(); ++k) rs.fill(work[k], A.row(static_cast<Eigen::Index>(k)), b[static_cast<Eigen::Index>(k)]);
    auto lr = lp::solve_inequality_lp(A, b, cost, box);
    x = lr.x;
    Eigen::VectorXd v = rs.violations(x);
    std::vector<std::pair<double, std::size_t>> bad;
    for (std::size_t r = 0; r < rs.count(); ++r)
      if (!active[r] && v[static_cast<Eigen::Index>(r)] > 1e-9) bad.emplace_back(v[static_cast<Eigen::Index>(r)], r);
    if (bad.empty()) break;
    std::size_t add = std::min<std::size_t>(bad.size(), static_cast<std::size_t>(std::max<Eigen::Index>(200, nvar)));
    std::partial_sort(bad.begin(), bad.begin() + static_cast<long>(add), bad.end(), std::greater<>());
    for (std::size_t k = 0; k < add; ++k) {
      active[bad[k].second] = 1;
      work.push_back(bad[k].second);
    }
  }
  LpFit out;
  out.c = x.head(d1).cast<cplx>() + cplx(0, 1) * x.segment(d1, d1).cast<cplx>();
  out.t = x[2 * d1];
  return out;
}

}  // namespace

std::vector<cplx> Sampling::points(const geometry::Region& r) const {
  using geometry::SampleMode;
  if (geometry::is_curve_kind(r)) return geometry::sample(r, density, SampleMode::curve).pts;
  auto out = geometry::sample(r, density, SampleMode::boundary).pts;
  auto in = geometry::sample(r, interior_density, SampleMode::filled).pts;
  out.insert(out.end(), in.begin(), in.end());
  return out;
}

double boundary_density(double base, int degree, double scale) { return std::max(base, 2.0 * (degree + 1) / scale); }

std::pair<Poly, OneSidedReport> approximate_one_sided(const ProblemBuilder& build, double scale, const Limits& limits,
                                                      std::size_t b_index) {
  check_limits(limits);
  OneSidedReport rep;
  Poly best;
  double best_score = std::numeric_limits<double>::infinity();
  int last = 0;
  double built_for = -1.0;
  OneSidedProblem fit, val;
  std::vector<cplx> z;
  for (int d : degree_schedule(limits.max_degree)) {
    const double dens = boundary_density(limits.fit_density, d, scale);
    if (dens != built_for) {
      fit = build({dens, limits.fit_density});
      val = build({dens * limits.validation_density / limits.fit_density, limits.validation_density});
      z = all_points(fit);
      built_for = dens;
    }
    if (static_cast<int>(z.size()) < 3 * (d + 1)) break;
    last = d;
    ArnoldiBasis basis = fit_basis(z, d, scale);
    LpFit lf = solve_lp(basis, fit);
    Poly P = to_monomial(ArnoldiPoly{basis.scale, basis.H, lf.c});

    double br = 0.0, sr = 0.0, lm = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < val.budget.z.size(); ++i)
      br = std::max(br, std::abs(P(val.budget.z[i]) - val.budget.f[i]) / val.budget.tol[i]);
    for (std::size_t i = 0; i < val.soft.z.size(); ++i)
      sr = std::max(sr, std::abs(P(val.soft.z[i]) - val.soft.f[i]) / val.soft.tol[i]);
    for (std::size_t i = 0; i < val.lower.z.size(); ++i) lm = std::min(lm, P(val.lower.z[i]).real() - val.lower.level[i]);
    rep.history.push_back({d, lf.t, br, sr, lm});
    double score = std::max(br, lm > 0 ? 0.0 : 1.0 - lm);
    if (score < best_score) {
      best_score = score;
      best = P;
      rep.degree = d;
      rep.lp_ratio = lf.t;
      rep.budget_ratio = br;
      rep.soft_ratio = sr;
      rep.lower_margin = lm;
    }
    if (br < 1.0 && lm > 0.0) return {best, rep};
    // the fit-grid optimum bounds what this degree can reach
    const auto& h = rep.history;
    if (limits.stop_on_stall && h.size() >= 4 && lf.t > 1.5) {
      bool stalled = true;
      for (std::size_t k = h.size() - 3; k < h.size(); ++k) stalled = stalled && h[k].lp_ratio > 0.85 * h[k - 1].lp_ratio;
      if (stalled) {
        rep.stalled = true;
        break;
      }
    }
  }
  std::ostringstream os;
  os << (rep.stalled ? "no convergence (stalled): " : "no convergence: ") << "best budget ratio " << rep.budget_ratio
     << ", lower-bound margin " << rep.lower_margin << " up to degree " << last << " (history:";
  for (const auto& h : rep.history)
    os << " d=" << h.degree << " lp=" << h.lp_ratio << " budget=" << h.budget_ratio << " margin=" << h.lower_margin
       << ";";
  os << ")";
  throw NoConvergence(b_index, rep.budget_ratio, last, os.str());
}

}  // namespace propermap::engine
