#pragma once

#include <cstddef>
#include <functional>
#include <string_view>
#include <vector>

#include "conspec/linalg.hpp"

namespace conspec {

// coeffs . x >= rhs
struct LinearConstraint {
  Vector coeffs;
  double rhs = 0;
};

// maximize objective . x subject to lower <= x <= upper and the constraints.
// Bounds may be infinite.
struct LinearProgram {
  Vector lower;
  Vector upper;
  std::vector<LinearConstraint> constraints;
  Vector objective;

  std::size_t num_vars() const noexcept { return lower.size(); }
};

enum class LpStatus { Optimal, Infeasible };
std::string_view to_string(LpStatus s);

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  double value = 0;
  Vector point;
  std::size_t iterations = 0;
};

struct LpOptions {
  double pivot_tolerance = 1e-9;
  std::size_t max_iterations = 100000;
};

// Dense bounded-variable primal simplex with Bland's rule. Phase one adds an
// artificial to each row the starting point violates. Throws
// NumericalBreakdown when an improving column has no usable pivot or the
// iteration limit is hit.
LpResult solve_lp_max(const LinearProgram& lp, const LpOptions& options = {});

using LpSolver = std::function<LpResult(const LinearProgram&)>;

}  // namespace conspec
