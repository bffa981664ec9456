#pragma once

#include <string>
#include <unordered_map>

#include "dpps/conic.hpp"

namespace dpps {

enum class SolveStatus { optimal, infeasible, numerical_failure };

std::string to_string(SolveStatus s);

struct SolverConfig {
  double feas_tol = 1e-7;
  double opt_tol = 1e-7;
  int max_iters = 200;
  int verbosity = 0;
};

struct SolveResult {
  SolveStatus status = SolveStatus::numerical_failure;
  double objective = 0.0;
  Eigen::VectorXd x;
  double solve_time = 0.0;  // seconds
  int iterations = 0;
  std::string message;
};

/// Solves a ConicProgram, optionally with a sparse linear objective overlay
/// (the multiplier terms supplied at solve time). Reentrant; no shared state.
SolveResult solve(const ConicProgram& prog,
                  const std::vector<std::pair<int, double>>* extra_linear = nullptr,
                  const SolverConfig& cfg = {});

/// Primal values keyed by variable name.
std::unordered_map<std::string, double> named_values(const ConicProgram& prog,
                                                     const Eigen::VectorXd& x);

/// Interior-point solve of the standard-form cone QP. Used directly by
/// performance-sensitive callers; `solve` wraps lowering + this.
SolveResult solve_cone_qp(const ConeData& data, const SolverConfig& cfg);

}  // namespace dpps
