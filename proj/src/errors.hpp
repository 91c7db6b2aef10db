#pragma once

#include <stdexcept>
#include <string>

namespace propermap {

enum class ErrorCode {
  validation = 1,
  mode,
  too_few_samples,
  rank_deficient,
  no_convergence,
  precondition,
  post_check_failed,
  certificate_failed,
  domain,
  grid_mismatch,
  config,
  io,
  state,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

// Raised when degree escalation reaches its ceiling without meeting tolerance.
class NoConvergence : public Error {
public:
  NoConvergence(std::size_t b_index, double best_error, int degree, const std::string& detail)
      : Error(ErrorCode::no_convergence, detail), b_index(b_index), best_error(best_error), degree(degree) {}
  std::size_t b_index;
  double best_error;
  int degree;
};

}  // namespace propermap
