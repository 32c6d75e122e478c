#include "conspec/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "overloaded.hpp"
#include "conspec/csv.hpp"
#include "conspec/error.hpp"
#include "conspec/simd.hpp"

namespace conspec {

using detail::overloaded;
using lang::Clause;
using lang::Literal;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vector unit(std::span<const double> q, std::string_view what) {
  const double n = norm(q);
  if (!(n > 0)) throw Error(ErrorKind::ZeroVector, std::string(what) + " has zero norm");
  Vector out(q.begin(), q.end());
  for (double& v : out) v /= n;
  return out;
}

std::vector<double> json_array(const nlohmann::json& j, const char* key, const std::string& src) {
  if (!j.contains(key) || !j[key].is_array()) throw Error(ErrorKind::FormatError, src + ": missing array '" + key + "'");
  std::vector<double> out;
  for (const auto& v : j[key]) {
    if (!v.is_number()) throw Error(ErrorKind::FormatError, src + ": non-numeric entry in '" + key + "'");
    out.push_back(v.get<double>());
  }
  if (!all_finite(out)) throw Error(ErrorKind::FormatError, src + ": non-finite entry in '" + key + "'");
  return out;
}

// margin . x + k, plus its range over the box.
struct Margin {
  LinearForm form;
  double lo = 0, hi = 0;
};

Margin margin(const LinearForm& plus, const LinearForm& minus, const BoxRegion& box) {
  Margin m;
  m.form.s = plus.s;
  simd::axpy(-1.0, minus.s, m.form.s);
  m.form.k = plus.k - minus.k;
  m.lo = m.hi = m.form.k;
  for (std::size_t i = 0; i < box.dim(); ++i) {
    const double a = m.form.s[i] * box.lower[i], b = m.form.s[i] * box.upper[i];
    m.lo += std::min(a, b);
    m.hi += std::max(a, b);
  }
  return m;
}

nlohmann::ordered_json epsilon_json(double eps) {
  if (std::isinf(eps)) return eps > 0 ? "inf" : "-inf";
  return eps;
}

}  // namespace

Vector LinearHead::scores(std::span<const double> w) const {
  if (w.size() != dim()) {
    throw Error(ErrorKind::DimMismatch, "head expects dim " + std::to_string(dim()) + ", got " +
                                            std::to_string(w.size()));
  }
  Vector s = matvec(a, w);
  simd::axpy(1.0, b, s);
  return s;
}

void save_head_json(const LinearHead& head, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["A"] = head.a.data();
  j["b"] = head.b;
  j["classes"] = head.classes;
  csv::write_text_file(path, j.dump() + "\n");
}

LinearHead load_head_json(const std::filesystem::path& path) {
  const std::string src = path.string();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(csv::read_text_file(path));
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorKind::FormatError, src + ": " + ex.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::FormatError, src + ": expected an object");
  LinearHead h;
  h.b = json_array(j, "b", src);
  auto a = json_array(j, "A", src);
  if (h.b.empty() || a.empty() || a.size() % h.b.size() != 0) {
    throw Error(ErrorKind::FormatError, src + ": A must hold |b| rows of equal width");
  }
  const std::size_t cols = a.size() / h.b.size();
  h.a = Matrix(h.b.size(), cols, std::move(a));
  if (!j.contains("classes") || !j["classes"].is_array()) {
    throw Error(ErrorKind::FormatError, src + ": missing array 'classes'");
  }
  for (const auto& c : j["classes"]) {
    if (!c.is_string()) throw Error(ErrorKind::FormatError, src + ": class names must be strings");
    h.classes.push_back(c.get<std::string>());
  }
  if (h.classes.size() != h.b.size()) {
    throw Error(ErrorKind::FormatError, src + ": " + std::to_string(h.classes.size()) + " class names for " +
                                            std::to_string(h.b.size()) + " head rows");
  }
  return h;
}

DirectionMap direction_map(std::span<const ConceptDirection> dirs) {
  DirectionMap out;
  for (const auto& d : dirs) out.insert_or_assign(d.name, d.direction);
  return out;
}

std::size_t VerificationContext::num_classes() const {
  return std::visit(overloaded{[](const VisionModel& v) { return v.head.num_classes(); },
                               [](const ZeroShotModel& z) { return z.class_dirs.size(); }},
                    model);
}

std::size_t VerificationContext::input_dim() const {
  return std::visit(overloaded{[](const VisionModel& v) { return v.head.dim(); },
                               [](const ZeroShotModel& z) { return z.class_dirs.empty() ? 0 : z.class_dirs[0].size(); }},
                    model);
}

std::string VerificationContext::class_name(std::size_t k) const {
  const auto& names = std::visit(overloaded{[](const VisionModel& v) -> const std::vector<std::string>& {
                                              return v.head.classes;
                                            },
                                            [](const ZeroShotModel& z) -> const std::vector<std::string>& {
                                              return z.class_names;
                                            }},
                                 model);
  return k < names.size() ? names[k] : "class" + std::to_string(k);
}

LinearForm VerificationContext::class_form(std::size_t k) const {
  if (k >= num_classes()) {
    throw Error(ErrorKind::DimMismatch, "class index " + std::to_string(k) + " outside " +
                                            std::to_string(num_classes()) + " classes");
  }
  return std::visit(overloaded{[&](const VisionModel& v) {
                                 const auto row = v.head.a.row(k);
                                 return LinearForm{Vector(row.begin(), row.end()), v.head.b[k]};
                               },
                               [&](const ZeroShotModel& z) {
                                 return LinearForm{unit(z.class_dirs[k], "class direction " + class_name(k)), 0.0};
                               }},
                    model);
}

Vector VerificationContext::to_vlm(std::span<const double> x) const {
  return std::visit(overloaded{[&](const VisionModel& v) { return apply_map(v.map, x); },
                               [&](const ZeroShotModel&) { return Vector(x.begin(), x.end()); }},
                    model);
}

LinearForm concept_form(const VerificationContext& ctx, std::string_view con) {
  const auto it = ctx.concepts.find(con);
  if (it == ctx.concepts.end()) {
    throw Error(ErrorKind::UnknownConcept, "no direction for concept '" + std::string(con) + "'");
  }
  const Vector q = unit(it->second, "direction of " + std::string(con));
  return std::visit(overloaded{[&](const VisionModel& v) {
                                 if (q.size() != v.map.p_g()) {
                                   throw Error(ErrorKind::DimMismatch, "concept direction dim differs from map output");
                                 }
                                 return LinearForm{matvec_transposed(v.map.m, q), simd::dot(q, v.map.d)};
                               },
                               [&](const ZeroShotModel&) {
                                 if (q.size() != ctx.input_dim()) {
                                   throw Error(ErrorKind::DimMismatch, "concept direction dim differs from class directions");
                                 }
                                 return LinearForm{q, 0.0};
                               }},
                    ctx.model);
}

LinearProgram encode_query(const Clause& clause, const VerificationContext& ctx, const BoxRegion& box) {
  const std::size_t p = ctx.input_dim();
  if (box.dim() != p) {
    throw Error(ErrorKind::DimMismatch, "box has dim " + std::to_string(box.dim()) + ", model input has dim " +
                                            std::to_string(p));
  }
  LinearProgram lp;
  lp.lower = box.lower;
  lp.upper = box.upper;
  lp.lower.push_back(0.0);
  lp.upper.push_back(0.0);
  lp.objective.assign(p + 1, 0.0);
  lp.objective[p] = 1.0;

  std::vector<Margin> margins;
  for (const Literal& l : clause) {
    if (l.kind == Literal::Kind::Predict) {
      if (!l.positive) {
        throw Error(ErrorKind::UnsupportedLiteral, "cannot encode " + lang::print(l) + " directly");
      }
      const LinearForm mine = ctx.class_form(l.cls.index);
      for (std::size_t k = 0; k < ctx.num_classes(); ++k) {
        if (k == l.cls.index) continue;
        const Margin m = margin(mine, ctx.class_form(k), box);
        LinearConstraint c{m.form.s, -m.form.k};
        c.coeffs.push_back(0.0);
        lp.constraints.push_back(std::move(c));
      }
    } else {
      const LinearForm a = concept_form(ctx, l.stronger);
      const LinearForm b = concept_form(ctx, l.weaker);
      margins.push_back(l.positive ? margin(a, b, box) : margin(b, a, box));
    }
  }
  if (!margins.empty()) {
    double lo = kInf, hi = kInf;
    for (const auto& m : margins) {
      lo = std::min(lo, m.lo);
      hi = std::min(hi, m.hi);
      LinearConstraint c{m.form.s, -m.form.k};
      c.coeffs.push_back(-1.0);
      lp.constraints.push_back(std::move(c));
    }
    lp.lower[p] = lo - 1.0;
    lp.upper[p] = hi + 1.0;
  }
  return lp;
}

LinearProgram encode_vision_query(const Clause& clause, const LinearHead& head, const AffineMap& map,
                                  const DirectionMap& concepts, const BoxRegion& box) {
  if (head.dim() != map.p_f()) throw Error(ErrorKind::DimMismatch, "head and map disagree on the input dim");
  VerificationContext ctx{VisionModel{head, map}, concepts, {}};
  return encode_query(clause, ctx, box);
}

LinearProgram encode_clip_query(const Clause& clause, std::span<const Vector> class_dirs,
                                const DirectionMap& concepts, const BoxRegion& box) {
  VerificationContext ctx{ZeroShotModel{std::vector<Vector>(class_dirs.begin(), class_dirs.end()), {}}, concepts, {}};
  return encode_query(clause, ctx, box);
}

std::vector<Clause> expand_negated_predicts(const Clause& clause, const VerificationContext& ctx) {
  std::set<std::size_t> positive, negative;
  Clause rest;
  for (const Literal& l : clause) {
    if (l.kind != Literal::Kind::Predict) {
      rest.push_back(l);
      continue;
    }
    if (l.cls.index >= ctx.num_classes()) {
      throw Error(ErrorKind::DimMismatch, "class '" + l.cls.name + "' outside the model's outputs");
    }
    (l.positive ? positive : negative).insert(l.cls.index);
  }
  auto with_predict = [&](std::size_t k) {
    Clause c = rest;
    Literal l;
    l.kind = Literal::Kind::Predict;
    l.cls = ClassLabel{ctx.class_name(k), k};
    c.push_back(std::move(l));
    return c;
  };
  if (positive.size() > 1) return {};
  if (positive.size() == 1) {
    if (negative.count(*positive.begin())) return {};
    return {with_predict(*positive.begin())};
  }
  if (negative.empty()) return {clause};
  std::vector<Clause> out;
  for (std::size_t k = 0; k < ctx.num_classes(); ++k) {
    if (!negative.count(k)) out.push_back(with_predict(k));
  }
  return out;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Proved:
      return "Proved";
    case Verdict::Counterexample:
      return "Counterexample";
    case Verdict::VacuouslyTrue:
      return "VacuouslyTrue";
  }
  return {};
}

// Concepts with identical forms tie everywhere: gt is constantly false.
static std::optional<Clause> drop_tied_strength(const Clause& clause, const VerificationContext& ctx) {
  Clause out;
  for (const Literal& l : clause) {
    if (l.kind == Literal::Kind::Gt) {
      const LinearForm a = concept_form(ctx, l.stronger);
      const LinearForm b = concept_form(ctx, l.weaker);
      if (a.s == b.s && a.k == b.k) {
        if (l.positive) return std::nullopt;
        continue;
      }
    }
    out.push_back(l);
  }
  return out;
}

VerificationOutcome verify_spec(const lang::ExprPtr& e, const VerificationContext& ctx, const BoxRegion& box,
                                std::size_t clause_cap) {
  if (!lang::is_core(*e)) throw Error(ErrorKind::InvalidArgument, "verify_spec() needs a desugared expression");
  const std::vector<Clause> clauses = lang::to_lp_queries(e, clause_cap);
  const LpSolver solve = ctx.solver ? ctx.solver : LpSolver([](const LinearProgram& lp) { return solve_lp_max(lp); });
  const std::size_t p = box.dim();

  VerificationOutcome out;
  out.epsilon = -kInf;
  bool any_feasible = false;
  std::size_t best_clause = clauses.size();
  for (const Clause& clause : clauses) {
    ClauseResult cr;
    cr.clause = lang::print(clause);
    cr.epsilon = -kInf;
    for (const Clause& expanded : expand_negated_predicts(clause, ctx)) {
      const std::optional<Clause> kept = drop_tied_strength(expanded, ctx);
      if (!kept) continue;
      const Clause& sub = *kept;
      const bool has_strength = std::any_of(sub.begin(), sub.end(),
                                            [](const Literal& l) { return l.kind == Literal::Kind::Gt; });
      const LinearProgram lp = encode_query(sub, ctx, box);
      const LpResult res = solve(lp);
      cr.iterations += res.iterations;
      if (res.status != LpStatus::Optimal) continue;
      const double eps = has_strength ? res.point[p] : kInf;
      if (!cr.feasible || eps > cr.epsilon) {
        cr.epsilon = eps;
        cr.point.assign(res.point.begin(), res.point.begin() + static_cast<std::ptrdiff_t>(p));
        cr.zero_norm = norm(ctx.to_vlm(cr.point)) < 1e-9;
      }
      cr.feasible = true;
    }
    out.iterations += cr.iterations;
    if (cr.feasible) {
      out.zero_norm = out.zero_norm || cr.zero_norm;
      if (!any_feasible || cr.epsilon > out.epsilon) {
        out.epsilon = cr.epsilon;
        best_clause = out.clauses.size();
      }
      any_feasible = true;
    }
    out.clauses.push_back(std::move(cr));
  }

  if (clauses.empty()) {
    out.verdict = Verdict::Proved;
  } else if (!any_feasible) {
    out.verdict = Verdict::VacuouslyTrue;
  } else if (out.epsilon > 0) {
    out.verdict = Verdict::Counterexample;
    out.point = out.clauses[best_clause].point;
  } else {
    out.verdict = Verdict::Proved;
  }
  return out;
}

std::string report_jsonl_line(const ReportRecord& r) {
  nlohmann::ordered_json j;
  j["spec_text"] = r.spec_text;
  j["region_provenance"] = r.region;
  j["outcome"] = to_string(r.outcome.verdict);
  j["epsilon"] = epsilon_json(r.outcome.epsilon);
  if (r.outcome.verdict == Verdict::Counterexample) j["point"] = r.outcome.point;
  auto clauses = nlohmann::ordered_json::array();
  for (const auto& c : r.outcome.clauses) {
    nlohmann::ordered_json cj;
    cj["clause"] = c.clause;
    cj["feasible"] = c.feasible;
    cj["epsilon"] = epsilon_json(c.epsilon);
    clauses.push_back(std::move(cj));
  }
  j["clauses"] = std::move(clauses);
  j["iterations"] = r.outcome.iterations;
  if (r.outcome.zero_norm) j["zero_norm"] = true;
  if (r.solve_ms) j["solve_ms"] = *r.solve_ms;
  if (r.timestamp) j["timestamp"] = *r.timestamp;
  return j.dump() + "\n";
}

std::string plot_csv(const std::vector<ReportRecord>& records, const std::vector<std::size_t>& spec_indices) {
  if (records.size() != spec_indices.size()) throw Error(ErrorKind::InvalidArgument, "one spec index per record");
  std::ostringstream out;
  csv::write_record(out, {"spec_index", "region", "epsilon"});
  for (std::size_t i = 0; i < records.size(); ++i) {
    csv::write_record(out, {std::to_string(spec_indices[i]), records[i].region,
                            csv::format_double(records[i].outcome.epsilon)});
  }
  return out.str();
}

std::vector<ParsedRecord> load_report_jsonl(const std::filesystem::path& path) {
  const std::string src = path.string();
  std::istringstream in(csv::read_text_file(path));
  std::vector<ParsedRecord> out;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      ParsedRecord r;
      r.spec_text = j.at("spec_text").get<std::string>();
      r.region = j.at("region_provenance").get<std::string>();
      r.outcome = j.at("outcome").get<std::string>();
      const auto& eps = j.at("epsilon");
      if (eps.is_string()) {
        const auto s = eps.get<std::string>();
        if (s != "inf" && s != "-inf") throw Error(ErrorKind::FormatError, "bad epsilon '" + s + "'");
        r.epsilon = s == "inf" ? kInf : -kInf;
      } else {
        r.epsilon = eps.get<double>();
      }
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorKind::FormatError, src + ":" + std::to_string(line_no) + ": " + ex.what());
    } catch (const Error& ex) {
      throw Error(ErrorKind::FormatError, src + ":" + std::to_string(line_no) + ": " + ex.message());
    }
  }
  return out;
}

}  // namespace conspec
