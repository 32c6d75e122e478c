#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "conspec/lang.hpp"
#include "conspec/regions.hpp"
#include "conspec/rep_maps.hpp"
#include "conspec/verifier.hpp"

namespace conspec {

// Explicit input points standing in for the input scope.
struct FiniteScope {
  std::vector<Vector> points;
};

using ScoreTable = std::map<Vector, Vector>;
using RepTable = std::map<Vector, lang::RepValues>;
using EncoderTable = std::map<Vector, Vector>;  // input point -> embedding

// Conjunction of evaluate() over the scope. Throws MissingPoint when a table
// lacks a scope point.
bool brute_force_satisfaction(const lang::Expr& e, const ScoreTable& f, const RepTable& rep,
                              const FiniteScope& scope);

// Both sides of the embedding-space equivalence for a head over an encoder:
// the left side evaluates e per input x with f(x) = head(enc(x)) and
// rep(x) = cos(M enc(x) + d, q); the right side evaluates e once per
// distinct embedding v with head(v) and rep^(v) = cos(M v + d, q). Returns
// whether they agree. `rep` must carry the affine map.
bool theorem1_check(const lang::ExprPtr& e, const FiniteScope& scope, const EncoderTable& enc,
                    const LinearHead& head, const RepMap& rep);

// VLM variant: the classifier is the zero-shot head over enc(x) and rep is
// cosine in the VLM space.
bool theorem2_check(const lang::ExprPtr& e, const FiniteScope& scope, const EncoderTable& enc,
                    std::span<const ConceptDirection> class_dirs, const RepMap& rep);

struct GridResult {
  bool feasible = false;
  double epsilon = 0;  // max over feasible grid points; +inf without strength literals
  Vector point;
  std::size_t evaluated = 0;
};

inline constexpr std::size_t kMaxGridPoints = 10'000'000;

// Exhaustive evaluation of one clause on the grid lower + k * step (upper
// endpoints included) with the verifier's non-strict classification and
// linear strength margins. Box dim must be at most 4.
GridResult grid_violation_oracle(const lang::Clause& clause, const VerificationContext& ctx, const BoxRegion& box,
                                 double step, std::size_t jobs = 1);

// step * max over strength literals of the L1 norm of the margin's
// coefficients: how far the grid maximum can trail the exact one when the
// exact maximizer's grid neighbourhood is feasible.
double grid_tolerance(const lang::Clause& clause, const VerificationContext& ctx, double step);

// Restricts a problem to the coordinates `dims`, fixing the rest at `base`.
// The result is always on the vision path; zero-shot models become a unit-row
// head under an identity map.
VerificationContext project_context(const VerificationContext& ctx, std::span<const std::size_t> dims,
                                    std::span<const double> base);
BoxRegion project_box(const BoxRegion& box, std::span<const std::size_t> dims);

struct AuditRow {
  std::string clause;
  bool lp_feasible = false;
  double lp_epsilon = 0;
  bool grid_feasible = false;
  double grid_epsilon = 0;
  double tolerance = 0;
  bool consistent = false;
};

// LP versus grid on every sub-clause of Not(e) for the projected problem.
std::vector<AuditRow> audit_projection(const lang::ExprPtr& e, const VerificationContext& ctx, const BoxRegion& box,
                                       std::span<const std::size_t> dims, std::span<const double> base,
                                       double step, std::size_t jobs = 1);

}  // namespace conspec
