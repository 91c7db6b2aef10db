#pragma once

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "families.hpp"

namespace propermap::engine {

using geometry::cplx;
using families::CompactFamily;
using families::ParamGrid;
using families::PerParamReal;

// p(z) = sum_k coeffs[k] (z / scale)^k
struct Poly {
  double scale = 1.0;
  std::vector<cplx> coeffs{cplx(0.0)};

  cplx operator()(cplx z) const;
  cplx power_sum(cplx z) const;  // direct evaluation, for cross-checks
  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
  static Poly constant(cplx c) { return Poly{1.0, {c}}; }
};

struct PolyFamily {
  ParamGrid grid;
  std::vector<Poly> polys;
  cplx operator()(std::size_t b, cplx z) const { return polys[b](z); }
};

// Orthonormal graded basis on a discrete sample, built by the
// multiply-by-z-then-orthogonalize recursion in the variable z / scale.
struct ArnoldiBasis {
  double scale = 1.0;
  Eigen::MatrixXcd Q;  // samples x (degree+1)
  Eigen::MatrixXcd H;  // (degree+1) x degree
  Eigen::VectorXd weights;
  double condition = 1.0;
  int degree() const { return static_cast<int>(Q.cols()) - 1; }
};

ArnoldiBasis fit_basis(const std::vector<cplx>& samples, int degree, double scale = 0.0,
                       const std::vector<double>& weights = {});

struct ArnoldiPoly {
  double scale = 1.0;
  Eigen::MatrixXcd H;
  Eigen::VectorXcd c;
  cplx operator()(cplx z) const;
  Eigen::VectorXcd eval(const std::vector<cplx>& z) const;
};

ArnoldiPoly project(const ArnoldiBasis& basis, const std::vector<cplx>& values);
// Monomial coefficients in z / scale, recovered from values on the unit circle.
Poly to_monomial(const ArnoldiPoly& p);

struct TargetPiece {
  CompactFamily family;
  std::function<cplx(std::size_t b, cplx z)> eval;
};

struct PiecewiseTarget {
  ParamGrid grid;
  std::vector<TargetPiece> pieces;
  // Value of the first piece whose fiber contains z.
  cplx operator()(std::size_t b, cplx z) const;
};

struct Limits {
  int max_degree = 400;
  double fit_density = 12.0;
  double validation_density = 24.0;
  double boundary_weight = 4.0;
  // one-sided fits give up once three doublings each improve the LP optimum by
  // less than 15%; false runs the whole schedule
  bool stop_on_stall = true;
};

std::vector<int> degree_schedule(int max_degree);

struct ParamReport {
  int degree = 0;
  double sup_error = 0.0;
  double tolerance = 0.0;
  double fit_residual = 0.0;
  double condition = 1.0;
  std::vector<double> margins;
  double validation_spacing = 0.0;
  std::vector<std::pair<int, double>> history;  // (degree, measured sup error)
};

struct ApproxReport {
  std::vector<ParamReport> per_b;
};

void validate(const PiecewiseTarget& t);

std::pair<PolyFamily, ApproxReport> approximate(const PiecewiseTarget& target, const PerParamReal& tol,
                                                const Limits& limits);

struct LowerBound {
  CompactFamily family;
  double level = 0.0;
};

std::pair<PolyFamily, ApproxReport> approximate_with_lower_bounds(const PiecewiseTarget& target,
                                                                  const std::vector<LowerBound>& constraints,
                                                                  const PerParamReal& tol, const Limits& limits,
                                                                  double rho = families::default_rho);

// Sup error of a family against a target on freshly generated validation samples.
std::vector<double> measure_sup_error(const PolyFamily& F, const PiecewiseTarget& target, double density);

// ---- budget-scoped one-sided fits used by the induction driver ----

struct MatchRows {
  std::vector<cplx> z, f;
  std::vector<double> tol;
  void add(cplx zz, cplx ff, double t) {
    z.push_back(zz);
    f.push_back(ff);
    tol.push_back(t);
  }
};

struct LowerRows {
  std::vector<cplx> z;
  std::vector<double> level, goal;
  void add(cplx zz, double c, double g) {
    z.push_back(zz);
    level.push_back(c);
    goal.push_back(g);
  }
};

// budget: |F - f| < t tol, with t minimised (certified against t < 1);
// soft: |F - f| <= u tol, with u entering the objective at soft_weight;
// cap: |F - f| <= tol, held exactly; lower: Re F > level, fitted with an
// extra goal margin.
struct OneSidedProblem {
  MatchRows budget, soft, cap;
  LowerRows lower;
  double soft_weight = 0.1;
};

// Where a builder should place its rows. Every row bounds a harmonic quantity,
// so only region boundaries need the fine spacing; interiors keep a coarse grid.
struct Sampling {
  double density = 12.0;           // curves and region boundaries
  double interior_density = 12.0;  // filled interiors
  std::vector<cplx> points(const geometry::Region& r) const;
};

using ProblemBuilder = std::function<OneSidedProblem(const Sampling&)>;

// Boundary density used at degree d: at least two points per unit of d/scale.
double boundary_density(double base, int degree, double scale);

struct OneSidedReport {
  int degree = 0;
  double lp_ratio = 0.0;       // optimal scaling of all tolerances on the fit rows
  double budget_ratio = 0.0;   // max |F - f| / tol on validation budget rows
  double soft_ratio = 0.0;
  double lower_margin = 0.0;   // min Re F - level on validation lower rows
  bool stalled = false;        // escalation stopped before max_degree
  struct Attempt {
    int degree;
    double lp_ratio, budget_ratio, soft_ratio, lower_margin;
  };
  std::vector<Attempt> history;
};

std::pair<Poly, OneSidedReport> approximate_one_sided(const ProblemBuilder& build, double scale, const Limits& limits,
                                                      std::size_t b_index = 0);

}  // namespace propermap::engine
