#include "lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace propermap::lp {

namespace {

double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
  double a = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (dv[i] < 0) a = std::min(a, -v[i] / dv[i]);
  return a;
}

}  // namespace

Result solve_inequality_lp(const Eigen::MatrixXd& A0, const Eigen::VectorXd& b0, const Eigen::VectorXd& c, double box,
                           int max_iterations, double tol) {
  const Eigen::Index n = A0.cols();
  const Eigen::Index extra = box > 0.0 ? 2 * n : 0;
  const Eigen::Index m = A0.rows() + extra;
  Eigen::MatrixXd A(m, n);
  Eigen::VectorXd b(m);
  A.topRows(A0.rows()) = A0;
  b.head(A0.rows()) = b0;
  if (extra) {
    A.bottomRows(extra).setZero();
    for (Eigen::Index j = 0; j < n; ++j) {
      A(A0.rows() + 2 * j, j) = 1.0;
      A(A0.rows() + 2 * j + 1, j) = -1.0;
    }
    b.tail(extra).setConstant(box);
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    double r = A.row(i).norm();
    if (r > 0) {
      A.row(i) /= r;
      b[i] /= r;
    }
  }

  Result res;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd s = (b - A * x).cwiseAbs().cwiseMax(1.0);
  Eigen::VectorXd y = Eigen::VectorXd::Ones(m);
  const double bnorm = 1.0 + b.lpNorm<Eigen::Infinity>(), cnorm = 1.0 + c.lpNorm<Eigen::Infinity>();

  Eigen::VectorXd best_x = x;
  double best_merit = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd B(m, n), N(n, n);
  Eigen::LLT<Eigen::MatrixXd> llt;
  for (int it = 0; it < max_iterations; ++it) {
    res.iterations = it + 1;
    Eigen::VectorXd rd = A.transpose() * y + c;
    Eigen::VectorXd rp = A * x + s - b;
    double mu = s.dot(y) / static_cast<double>(m);
    double pobj = c.dot(x), dobj = -b.dot(y);
    double pinf = rp.lpNorm<Eigen::Infinity>() / bnorm, dinf = rd.lpNorm<Eigen::Infinity>() / cnorm;
    double gap = std::fabs(pobj - dobj) / (1.0 + std::fabs(pobj));
    double merit = std::max({pinf, dinf, gap});
    if (merit < best_merit) {
      best_merit = merit;
      best_x = x;
    }
    if (pinf < tol && dinf < tol && gap < tol) {
      res.converged = true;
      break;
    }
    Eigen::VectorXd d = y.cwiseQuotient(s);
    B = A.array().colwise() * d.cwiseSqrt().array();
    N.setZero();
    N.selfadjointView<Eigen::Lower>().rankUpdate(B.transpose());
    double reg = 1e-14 * std::max(1.0, N.diagonal().maxCoeff());
    N.diagonal().array() += reg;
    llt.compute(N.selfadjointView<Eigen::Lower>());
    if (llt.info() != Eigen::Success) {
      N.diagonal().array() += 1e-9 * std::max(1.0, N.diagonal().maxCoeff());
      llt.compute(N.selfadjointView<Eigen::Lower>());
      if (llt.info() != Eigen::Success) break;
    }

    auto direction = [&](const Eigen::VectorXd& rc, Eigen::VectorXd& dx, Eigen::VectorXd& ds, Eigen::VectorXd& dy) {
      Eigen::VectorXd t = (-rc + y.cwiseProduct(rp)).cwiseQuotient(s);
      Eigen::VectorXd rhs = -rd - A.transpose() * t;
      dx = llt.solve(rhs);
      dx += llt.solve(rhs - N.selfadjointView<Eigen::Lower>() * dx);  // one step of refinement
      ds = -rp - A * dx;
      dy = (-rc - y.cwiseProduct(ds)).cwiseQuotient(s);
    };

    Eigen::VectorXd dxa, dsa, dya;
    Eigen::VectorXd rc = s.cwiseProduct(y);
    direction(rc, dxa, dsa, dya);
    double ap = max_step(s, dsa), ad = max_step(y, dya);
    double mu_aff = (s + ap * dsa).dot(y + ad * dya) / static_cast<double>(m);
    double sigma = std::pow(std::max(0.0, mu_aff) / mu, 3.0);

    rc = s.cwiseProduct(y) + dsa.cwiseProduct(dya) - Eigen::VectorXd::Constant(m, sigma * mu);
    Eigen::VectorXd dx, ds, dy;
    direction(rc, dx, ds, dy);
    const double eta = std::clamp(1.0 - 10.0 * mu / (1.0 + std::fabs(pobj)), 0.9, 0.9999);
    ap = std::min(1.0, eta * max_step(s, ds));
    ad = std::min(1.0, eta * max_step(y, dy));
    x += ap * dx;
    s += ap * ds;
    y += ad * dy;
    s = s.cwiseMax(1e-300);
    y = y.cwiseMax(1e-300);
  }
  if (!res.converged) x = best_x;
  res.x = x;
  res.objective = c.dot(x);
  return res;
}

}  // namespace propermap::lp
