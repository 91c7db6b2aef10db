#pragma once

#include <Eigen/Dense>

namespace propermap::lp {

struct Result {
  Eigen::VectorXd x;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Dense Mehrotra predictor-corrector for  min c.x  subject to  A x <= b.
// Variables are free unless box > 0, in which case |x_j| <= box is added so
// that every subproblem of a cutting-plane loop stays bounded. Rows are
// equilibrated internally. Intended for a few thousand rows and up to ~1000
// columns.
Result solve_inequality_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                           double box = 0.0, int max_iterations = 150, double tol = 1e-9);

}  // namespace propermap::lp
