#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "conspec/lang.hpp"
#include "conspec/lp.hpp"
#include "conspec/regions.hpp"
#include "conspec/rep_maps.hpp"

namespace conspec {

// Scores A w + b, one row per class.
struct LinearHead {
  Matrix a;
  Vector b;
  std::vector<std::string> classes;

  std::size_t num_classes() const noexcept { return a.rows(); }
  std::size_t dim() const noexcept { return a.cols(); }
  Vector scores(std::span<const double> w) const;
};

// head.json: {"A": row-major, "b": [...], "classes": [...]}
void save_head_json(const LinearHead& head, const std::filesystem::path& path);
LinearHead load_head_json(const std::filesystem::path& path);

using DirectionMap = std::map<std::string, Vector, std::less<>>;
DirectionMap direction_map(std::span<const ConceptDirection> dirs);

// Vision path: box over w, classification by the head, concepts read through
// the affine map.
struct VisionModel {
  LinearHead head;
  AffineMap map;
};
// VLM path: box over z, zero-shot classification by class directions.
struct ZeroShotModel {
  std::vector<Vector> class_dirs;
  std::vector<std::string> class_names;
};

// s . x + k over box coordinates.
struct LinearForm {
  Vector s;
  double k = 0;
};

struct VerificationContext {
  std::variant<VisionModel, ZeroShotModel> model;
  DirectionMap concepts;
  LpSolver solver;  // defaults to solve_lp_max when empty

  std::size_t num_classes() const;
  std::size_t input_dim() const;
  std::string class_name(std::size_t k) const;
  // Score of class k as a linear form over box coordinates. Zero-shot scores
  // use unit class directions, which ranks like cosine when |z| > 0.
  LinearForm class_form(std::size_t k) const;
  // Box coordinates to VLM space.
  Vector to_vlm(std::span<const double> x) const;
};

// q^ . z with q^ = q / |q|, written over box coordinates (z = M w + d on the
// vision path, z = x on the VLM path).
LinearForm concept_form(const VerificationContext& ctx, std::string_view con);

// Variables are the box coordinates followed by eps (index dim). Predict(c)
// adds one dominance row per other class; Not(Gt(a, b)) adds
// form_b - form_a >= eps and Gt(a, b) adds form_a - form_b >= eps. With no
// strength literal, eps is pinned to 0 and the LP is a feasibility check.
LinearProgram encode_vision_query(const lang::Clause& clause, const LinearHead& head, const AffineMap& map,
                                  const DirectionMap& concepts, const BoxRegion& box);
LinearProgram encode_clip_query(const lang::Clause& clause, std::span<const Vector> class_dirs,
                                const DirectionMap& concepts, const BoxRegion& box);
LinearProgram encode_query(const lang::Clause& clause, const VerificationContext& ctx, const BoxRegion& box);

// Rewrites Not(Predict) literals into clauses of positive Predict literals:
// dropped when the clause already predicts some class, otherwise one clause
// per class not excluded. A clause predicting two distinct classes is
// dropped as unsatisfiable under the strict argmax.
std::vector<lang::Clause> expand_negated_predicts(const lang::Clause& clause, const VerificationContext& ctx);

struct ClauseResult {
  std::string clause;  // printed source clause
  bool feasible = false;
  double epsilon = 0;  // max over sub-problems; +inf without strength literals
  Vector point;        // maximizer in box coordinates
  std::size_t iterations = 0;
  bool zero_norm = false;  // |z| < 1e-9 at the point
};

enum class Verdict { Proved, Counterexample, VacuouslyTrue };
std::string_view to_string(Verdict v);

struct VerificationOutcome {
  Verdict verdict = Verdict::Proved;
  double epsilon = 0;  // max eps over feasible clauses; -inf if none were generated
  Vector point;        // Counterexample only
  std::vector<ClauseResult> clauses;
  std::size_t iterations = 0;
  bool zero_norm = false;
};

// e must be desugared. gt between concepts with identical forms is taken as false.
VerificationOutcome verify_spec(const lang::ExprPtr& e, const VerificationContext& ctx, const BoxRegion& box,
                                std::size_t clause_cap = lang::kDefaultClauseCap);

struct ReportRecord {
  std::string spec_text;
  std::string region;
  VerificationOutcome outcome;
  std::optional<double> solve_ms;
  std::optional<std::string> timestamp;
};

// One JSON object per line: spec_text, region_provenance, outcome, epsilon,
// point (counterexamples only), per-clause results, solve_ms and timestamp
// (when set). Infinite epsilon is written as the string "inf" or "-inf".
std::string report_jsonl_line(const ReportRecord& r);
// Plot data `spec_index,region,epsilon`.
std::string plot_csv(const std::vector<ReportRecord>& records, const std::vector<std::size_t>& spec_indices);

struct ParsedRecord {
  std::string spec_text;
  std::string region;
  std::string outcome;
  double epsilon = 0;
};
std::vector<ParsedRecord> load_report_jsonl(const std::filesystem::path& path);

}  // namespace conspec
