// One PASS/FAIL line per acceptance criterion; exits nonzero on any FAIL.

#define DOCTEST_CONFIG_DISABLE

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "../support/check.hpp"
#include "../support/gen.hpp"
#include "../support/toys.hpp"
#include "conspec/cli.hpp"
#include "conspec/csv.hpp"
#include "conspec/lang.hpp"
#include "conspec/oracle.hpp"
#include "conspec/stat_validate.hpp"
#include "conspec/verifier.hpp"

using namespace conspec;
using namespace conspec::lang;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  double budget_s;
  std::function<Outcome()> body;
};

std::string num(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

double dot(const Vector& a, const Vector& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l2(const Vector& a) { return std::sqrt(dot(a, a)); }

Vector unit(const Vector& a) {
  Vector u = a;
  const double n = l2(a);
  for (double& x : u) x /= n;
  return u;
}

double cosine(const Vector& a, const Vector& b) { return dot(a, b) / (l2(a) * l2(b)); }

Vector affine(const Matrix& m, const Vector& d, const Vector& w) {
  Vector z = d;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) z[i] += m(i, j) * w[j];
  }
  return z;
}

ExprPtr spec(const std::string& text, const TaskVocabulary& v) { return desugar(parse_spec(text, v), v); }

// ---------------------------------------------------------------------------

Outcome language() {
  testgen::Rng rng(1001);
  const auto v = testgen::small_vocab();
  std::size_t mismatches = 0, roundtrip = 0, dnf = 0, assignments = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto e = testgen::random_expr(rng, v, 5);
    const auto text = print(*e);
    const auto back = parse_spec(text, v);
    if (!equal(back, e) || print(*back) != text) ++roundtrip;
    const auto d = desugar(e, v);
    std::vector<Clause> clauses;
    bool have_dnf = true;
    try {
      clauses = to_lp_queries(d, 1u << 20);
    } catch (const Error&) {
      have_dnf = false;
    }
    for (int k = 0; k < 20; ++k) {
      const auto rep = testgen::random_rep(rng, v);
      const auto scores = testgen::random_scores(rng, v.classes().size());
      const bool want = testgen::reference_eval(*e, scores, rep, v);
      if (evaluate(*d, scores, rep) != want) ++mismatches;
      if (!have_dnf) continue;
      ++assignments;
      bool any = false;
      for (const auto& c : clauses) {
        bool all = true;
        for (const auto& l : c) all = all && evaluate(l, scores, rep);
        any = any || all;
      }
      if (any == want) ++dnf;
    }
  }
  return {mismatches == 0 && roundtrip == 0 && dnf == 0,
          "1000 ASTs; desugar mismatches " + std::to_string(mismatches) + ", round-trip failures " +
              std::to_string(roundtrip) + ", DNF failures " + std::to_string(dnf) + "/" + std::to_string(assignments)};
}

// ---------------------------------------------------------------------------

struct ThmInstance {
  FiniteScope scope;
  EncoderTable enc;
  std::vector<ConceptDirection> dirs, dirs_f, cls;
  LinearHead head;
  AffineMap map;
  ExprPtr e;
  ExprPtr sugared;
};

ThmInstance thm_instance(testgen::Rng& rng, const TaskVocabulary& v) {
  ThmInstance in;
  const std::size_t pf = 2 + rng.index(3), pg = 2 + rng.index(3);
  for (const auto& c : v.concepts()) in.dirs.push_back({c, rng.normal_vector(pg), 1});
  for (const auto& c : v.concepts()) in.dirs_f.push_back({c, rng.normal_vector(pf), 1});
  for (const auto& c : v.classes()) in.cls.push_back({c, rng.normal_vector(pf), 1});
  in.head = LinearHead{Matrix(v.classes().size(), pf, rng.normal_vector(v.classes().size() * pf)),
                       rng.normal_vector(v.classes().size()), v.classes()};
  in.map = AffineMap{Matrix(pg, pf, rng.normal_vector(pg * pf)), rng.normal_vector(pg)};
  std::vector<Vector> pool;
  const std::size_t distinct = 5 + rng.index(30);
  for (std::size_t i = 0; i < distinct; ++i) pool.push_back(rng.normal_vector(pf));
  for (std::size_t i = 0; i < 50; ++i) {
    in.scope.points.push_back(rng.normal_vector(3));
    // Fewer embeddings than inputs, so the encoder is never injective.
    in.enc[in.scope.points.back()] = pool[i < distinct ? i : rng.index(distinct)];
  }
  in.sugared = testgen::random_expr(rng, v, 4);
  in.e = desugar(in.sugared, v);
  return in;
}

Outcome theorems() {
  testgen::Rng rng(1002);
  const auto v = testgen::small_vocab();
  std::size_t agree1 = 0, agree2 = 0, held1 = 0, held2 = 0;
  for (int t = 0; t < 500; ++t) {
    const auto in = thm_instance(rng, v);
    // Independent left side: per input, through the encoder.
    bool left1 = true, left2 = true;
    for (const auto& x : in.scope.points) {
      const auto& w = in.enc.at(x);
      const auto z = affine(in.map.m, in.map.d, w);
      RepValues rep1, rep2;
      for (const auto& d : in.dirs) rep1[d.name] = cosine(z, d.direction);
      Vector s1(v.classes().size()), s2(v.classes().size());
      for (std::size_t k = 0; k < s1.size(); ++k) {
        s1[k] = in.head.b[k];
        for (std::size_t j = 0; j < w.size(); ++j) s1[k] += in.head.a(k, j) * w[j];
        s2[k] = cosine(w, in.cls[k].direction);
      }
      left1 = left1 && testgen::reference_eval(*in.sugared, s1, rep1, v);
      // Zero-shot variant: concepts read the encoder output directly.
      for (const auto& d : in.dirs_f) rep2[d.name] = cosine(w, d.direction);
      left2 = left2 && testgen::reference_eval(*in.sugared, s2, rep2, v);
    }
    const bool ok1 = theorem1_check(in.e, in.scope, in.enc, in.head, RepMap::hat(in.dirs, in.map));
    const bool ok2 = theorem2_check(in.e, in.scope, in.enc, in.cls, RepMap::hat(in.dirs_f));

    // The library's brute-force left side must match the independent one.
    ScoreTable f1;
    RepTable r1;
    for (const auto& x : in.scope.points) {
      const auto& w = in.enc.at(x);
      f1[x] = in.head.scores(w);
      r1[x] = rep_values(RepMap::via_affine(in.dirs, in.map), w);
    }
    const bool lib_left1 = brute_force_satisfaction(*in.e, f1, r1, in.scope);
    if (ok1 && lib_left1 == left1) ++agree1;
    ScoreTable f2;
    RepTable r2;
    for (const auto& x : in.scope.points) {
      const auto& w = in.enc.at(x);
      Vector s(in.cls.size());
      for (std::size_t k = 0; k < s.size(); ++k) s[k] = cosine_similarity(w, in.cls[k].direction);
      f2[x] = s;
      r2[x] = rep_values(RepMap::vlm_only(in.dirs_f), w);
    }
    const bool lib_left2 = brute_force_satisfaction(*in.e, f2, r2, in.scope);
    if (ok2 && lib_left2 == left2) ++agree2;
    held1 += left1;
    held2 += left2;
  }
  return {agree1 == 500 && agree2 == 500,
          "head variant " + std::to_string(agree1) + "/500 (" + std::to_string(held1) + " satisfied), VLM variant " +
              std::to_string(agree2) + "/500 (" + std::to_string(held2) + " satisfied)"};
}

// ---------------------------------------------------------------------------

Outcome affine_recovery() {
  testgen::Rng rng(1003);
  const std::size_t p = 8, n = 200;
  Matrix mstar(p, p, rng.normal_vector(p * p));
  const auto dstar = rng.normal_vector(p);
  EmbeddingSet f, g;
  for (std::size_t i = 0; i < n; ++i) {
    f.ids.push_back("x" + std::to_string(i));
    f.matrix.push_row(rng.normal_vector(p));
    g.matrix.push_row(affine(mstar, dstar, Vector(f.row(i).begin(), f.row(i).end())));
  }
  g.ids = f.ids;
  const auto m = fit_affine_map(f, g);
  double err = 0;
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) err = std::max(err, std::abs(m.m(i, j) - mstar(i, j)));
    err = std::max(err, std::abs(m.d[i] - dstar[i]));
  }
  const auto q = map_metrics(m, f, g);
  std::vector<ConceptDirection> dirs;
  for (int k = 0; k < 10; ++k) dirs.push_back({"k" + std::to_string(k), rng.normal_vector(p), 1});
  const auto via = RepMap::via_affine(dirs, m);
  const auto vlm = RepMap::vlm_only(dirs);
  double rep_gap = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& d : dirs) rep_gap = std::max(rep_gap, std::abs(rep_value(via, d.name, f.row(i)) - rep_value(vlm, d.name, g.row(i))));
  }
  return {err <= 1e-6 && q.mse <= 1e-10 && q.r2 >= 0.999999 && rep_gap <= 1e-9,
          "max-abs " + num(err) + ", mse " + num(q.mse) + ", r2 " + num(q.r2) + ", rep gap " + num(rep_gap)};
}

// ---------------------------------------------------------------------------

// Random low-dim problem; the predicted class is the head's choice at the
// box center so most antecedents are reachable.
struct Problem {
  VerificationContext ctx;
  BoxRegion box;
  TaskVocabulary vocab;
  std::size_t center_class = 0;
};

Problem random_problem(testgen::Rng& rng, std::size_t dim, bool vision, double max_width) {
  Problem pr;
  pr.vocab = TaskVocabulary({"k0", "k1", "k2", "k3"}, {"c0", "c1", "c2"});
  const std::size_t pg = vision ? 2 + rng.index(3) : dim;
  if (vision) {
    VisionModel vm;
    vm.head = LinearHead{Matrix(3, dim, rng.normal_vector(3 * dim)), rng.normal_vector(3), pr.vocab.classes()};
    vm.map = AffineMap{Matrix(pg, dim, rng.normal_vector(pg * dim)), rng.normal_vector(pg)};
    pr.ctx.model = vm;
  } else {
    ZeroShotModel zs;
    for (int k = 0; k < 3; ++k) zs.class_dirs.push_back(rng.normal_vector(pg));
    zs.class_names = pr.vocab.classes();
    pr.ctx.model = zs;
  }
  for (const auto& c : pr.vocab.concepts()) pr.ctx.concepts[c] = rng.normal_vector(pg);
  pr.box.lower = rng.uniform_vector(dim, -1, 1);
  pr.box.upper = pr.box.lower;
  for (double& u : pr.box.upper) u += rng.uniform(0.05, max_width);
  double best = -kInf;
  for (std::size_t k = 0; k < 3; ++k) {
    const auto f = pr.ctx.class_form(k);
    const double s = dot(f.s, pr.box.center()) + f.k;
    if (s > best) {
      best = s;
      pr.center_class = k;
    }
  }
  return pr;
}

std::string random_strength_spec(testgen::Rng& rng, const Problem& pr) {
  const std::string c = "c" + std::to_string(rng.index(10) < 8 ? pr.center_class : rng.index(3));
  const std::size_t a = rng.index(4);
  const std::size_t b = (a + 1 + rng.index(3)) % 4;
  const std::string ka = "k" + std::to_string(a), kb = "k" + std::to_string(b);
  switch (rng.index(4)) {
    case 0:
      return "predict(" + c + ") => gt(" + ka + ", " + kb + ")";
    case 1:
    {
      std::size_t k = 0;
      while (k == a || k == b) ++k;
      return "predict(" + c + ") => hasCon(" + ka + " | " + kb + ", k" + std::to_string(k) + ")";
    }
    case 2:
      return "predict(" + c + ") => !gt(" + ka + ", " + kb + ")";
    default:
      return "gt(" + ka + ", " + kb + ")";
  }
}

// step * L1 of the margin coefficients over box coordinates, computed here
// from the model rather than the library's encoding.
double independent_tolerance(const Clause& clause, const VerificationContext& ctx, double step) {
  double worst = 0;
  for (const auto& l : clause) {
    if (l.kind != Literal::Kind::Gt) continue;
    const Vector qa = unit(ctx.concepts.at(l.stronger)), qb = unit(ctx.concepts.at(l.weaker));
    Vector diff(qa.size());
    for (std::size_t i = 0; i < qa.size(); ++i) diff[i] = qb[i] - qa[i];
    double l1 = 0;
    if (const auto* vm = std::get_if<VisionModel>(&ctx.model)) {
      for (std::size_t j = 0; j < vm->map.p_f(); ++j) {
        double s = 0;
        for (std::size_t i = 0; i < diff.size(); ++i) s += vm->map.m(i, j) * diff[i];
        l1 += std::abs(s);
      }
    } else {
      for (double x : diff) l1 += std::abs(x);
    }
    worst = std::max(worst, l1);
  }
  return step * worst;
}

Outcome lp_vs_grid() {
  testgen::Rng rng(1004);
  const double step = 0.01;
  std::size_t ok = 0, feasible = 0, infeasible_both = 0;
  std::string first_failure;
  for (int t = 0; t < 100; ++t) {
    const std::size_t dim = 1 + static_cast<std::size_t>(t % 3);
    auto pr = random_problem(rng, dim, rng.coin(), 0.6);
    const auto e = spec(random_strength_spec(rng, pr), pr.vocab);
    auto clauses = to_lp_queries(e);
    std::vector<Clause> expanded;
    for (const auto& c : clauses) {
      for (auto& s : expand_negated_predicts(c, pr.ctx)) expanded.push_back(std::move(s));
    }
    if (expanded.empty()) {
      --t;
      continue;
    }
    const Clause& c = expanded[rng.index(expanded.size())];
    const auto lp = solve_lp_max(encode_query(c, pr.ctx, pr.box));
    const auto grid = grid_violation_oracle(c, pr.ctx, pr.box, step);
    const double tol = independent_tolerance(c, pr.ctx, step);
    bool pass;
    if (lp.status != LpStatus::Optimal) {
      pass = !grid.feasible;
      infeasible_both += pass;
    } else {
      ++feasible;
      pass = grid.feasible && grid.epsilon <= lp.value + 1e-9 && lp.value - grid.epsilon <= tol + 1e-9;
    }
    if (pass) {
      ++ok;
    } else if (first_failure.empty()) {
      first_failure = "; first failure #" + std::to_string(t) + " dim " + std::to_string(dim) + " clause " + print(c) +
                      " lp " + (lp.status == LpStatus::Optimal ? num(lp.value) : "infeasible") + " grid " +
                      (grid.feasible ? num(grid.epsilon) : "infeasible") + " tol " + num(tol);
    }
  }
  const auto v = toys::one_d_vocab();
  const auto e = spec("predict(c0) => gt(con1, con2)", v);
  const double proved = verify_spec(e, toys::one_d(false), toys::one_d_box()).epsilon;
  const double refuted = verify_spec(e, toys::one_d(true), toys::one_d_box()).epsilon;
  const bool toys_ok = std::abs(proved + 1.0) <= 1e-9 && std::abs(refuted - 2.0) <= 1e-9;
  return {ok == 100 && toys_ok, std::to_string(ok) + "/100 within tolerance (" + std::to_string(feasible) +
                                    " feasible, " + std::to_string(infeasible_both) + " infeasible in both); toys " +
                                    num(proved) + ", " + num(refuted) + first_failure};
}

// ---------------------------------------------------------------------------

int sign(double x) { return (x > 0) - (x < 0); }

Outcome norm_cancellation() {
  testgen::Rng rng(1005);
  std::size_t ok = 0, total = 0;
  for (int t = 0; t < 10000; ++t) {
    const std::size_t p = 1 + rng.index(8);
    Vector z = rng.normal_vector(p);
    if (rng.coin(0.1)) {
      for (double& x : z) x *= 1e-5;
    }
    if (l2(z) <= 1e-6) {
      --t;
      continue;
    }
    const Vector q1 = rng.normal_vector(p), q2 = rng.normal_vector(p);
    if (l2(q1) == 0 || l2(q2) == 0) {
      --t;
      continue;
    }
    ++total;
    // Cosine-form inequality cos(z, q2) >= cos(z, q1) against the library's
    // linear row for !gt(a, b) with a = q1, b = q2, at eps = 0.
    VerificationContext ctx;
    ctx.model = ZeroShotModel{{q1, q2}, {"c0", "c1"}};
    ctx.concepts = {{"a", q1}, {"b", q2}};
    Literal l;
    l.kind = Literal::Kind::Gt;
    l.positive = false;
    l.stronger = "a";
    l.weaker = "b";
    const BoxRegion box{Vector(p, -1e9), Vector(p, 1e9), {}, ""};
    const auto lp = encode_query({l}, ctx, box);
    const auto& row = lp.constraints.at(0);
    double lin = -row.rhs;
    for (std::size_t i = 0; i < p; ++i) lin += row.coeffs[i] * z[i];
    const int s_cos = sign(cosine(z, q2) - cosine(z, q1));
    // Zero-shot class rows: predict(c0) holds iff cos(z, q1) >= cos(z, q2).
    Literal pc;
    pc.kind = Literal::Kind::Predict;
    pc.cls = ClassLabel{"c0", 0};
    const auto lpc = encode_query({pc}, ctx, box);
    const auto& crow = lpc.constraints.at(0);
    double clin = -crow.rhs;
    for (std::size_t i = 0; i < p; ++i) clin += crow.coeffs[i] * z[i];
    if (sign(lin) == s_cos && sign(clin) == -s_cos) ++ok;
  }
  return {ok == total && total == 10000, std::to_string(ok) + "/" + std::to_string(total) + " signs agree"};
}

// ---------------------------------------------------------------------------

struct SoundnessTally {
  std::size_t proved = 0, counterexamples = 0, vacuous = 0, bad_ce = 0, falsified = 0;
  double worst_gap = 0;
  std::string first;
};

bool evaluate_at(const ExprPtr& e, const VerificationContext& ctx, const Vector& x) {
  const Vector z = ctx.to_vlm(x);
  RepValues rep;
  for (const auto& [name, q] : ctx.concepts) rep[name] = cosine(z, q);
  Vector scores;
  if (const auto* vm = std::get_if<VisionModel>(&ctx.model)) {
    scores = vm->head.scores(x);
  } else {
    for (const auto& d : std::get<ZeroShotModel>(ctx.model).class_dirs) scores.push_back(cosine(z, d));
  }
  return evaluate(*e, scores, rep);
}

// Checks a counterexample against the model directly; returns the worst
// deviation from the claimed constraints and slack.
double counterexample_gap(const VerificationOutcome& out, const VerificationContext& ctx, const BoxRegion& box) {
  double gap = 0;
  const Vector& x = out.point;
  for (std::size_t i = 0; i < box.dim(); ++i) {
    gap = std::max(gap, box.lower[i] - x[i]);
    gap = std::max(gap, x[i] - box.upper[i]);
  }
  // The clause that attains the maximum.
  const ClauseResult* best = nullptr;
  for (const auto& c : out.clauses) {
    if (c.feasible && (!best || c.epsilon > best->epsilon)) best = &c;
  }
  if (!best || best->point != x) return kInf;
  const Vector z = ctx.to_vlm(x);
  Vector scores;
  if (const auto* vm = std::get_if<VisionModel>(&ctx.model)) {
    scores = vm->head.scores(x);
  } else {
    for (const auto& d : std::get<ZeroShotModel>(ctx.model).class_dirs) scores.push_back(dot(unit(d), z));
  }
  // Re-parse the printed clause against the vocabulary of the context.
  std::vector<std::string> classes;
  for (std::size_t k = 0; k < ctx.num_classes(); ++k) classes.push_back(ctx.class_name(k));
  std::vector<std::string> concepts;
  for (const auto& [name, q] : ctx.concepts) concepts.push_back(name);
  const TaskVocabulary v(concepts, classes);
  const auto cl = to_lp_queries(negate(parse_spec(best->clause, v)));
  if (cl.size() != 1) return kInf;
  double min_margin = kInf;
  std::vector<std::size_t> negated;
  for (const auto& l : cl[0]) {
    if (l.kind == Literal::Kind::Predict) {
      if (l.positive) {
        for (double s : scores) gap = std::max(gap, s - scores[l.cls.index]);
      } else {
        negated.push_back(l.cls.index);
      }
    } else {
      const double a = dot(unit(ctx.concepts.at(l.stronger)), z), b = dot(unit(ctx.concepts.at(l.weaker)), z);
      // Tied directions only fit a negated literal.
      if (a == b) {
        if (l.positive) return kInf;
        continue;
      }
      min_margin = std::min(min_margin, l.positive ? a - b : b - a);
    }
  }
  if (!negated.empty()) {
    // Some class outside the excluded set must dominate.
    double best_gap = kInf;
    for (std::size_t c = 0; c < scores.size(); ++c) {
      if (std::find(negated.begin(), negated.end(), c) != negated.end()) continue;
      double g = 0;
      for (double s : scores) g = std::max(g, s - scores[c]);
      best_gap = std::min(best_gap, g);
    }
    gap = std::max(gap, best_gap);
  }
  if (std::isinf(out.epsilon)) {
    if (!std::isinf(min_margin)) return kInf;
  } else {
    gap = std::max(gap, std::abs(min_margin - out.epsilon));
  }
  return gap;
}

Outcome soundness() {
  testgen::Rng rng(1006);
  SoundnessTally t;
  const auto vocab = TaskVocabulary({"k0", "k1", "k2", "k3"}, {"c0", "c1", "c2"});
  for (int i = 0; i < 300; ++i) {
    const std::size_t dim = 1 + rng.index(5);
    auto pr = random_problem(rng, dim, rng.coin(), 1.5);
    ExprPtr e;
    if (rng.coin(0.7)) {
      e = spec(random_strength_spec(rng, pr), pr.vocab);
    } else {
      testgen::Rng sub(rng.engine()());
      e = desugar(testgen::random_expr(sub, pr.vocab, 3), pr.vocab);
    }
    VerificationOutcome out;
    try {
      out = verify_spec(e, pr.ctx, pr.box);
    } catch (const Error& ex) {
      if (ex.kind() == ErrorKind::ClauseExplosion) continue;
      throw;
    }
    if (out.verdict == Verdict::Counterexample) {
      ++t.counterexamples;
      const double gap = counterexample_gap(out, pr.ctx, pr.box);
      t.worst_gap = std::max(t.worst_gap, gap);
      if (!(gap <= 1e-7)) ++t.bad_ce;
    } else {
      out.verdict == Verdict::Proved ? ++t.proved : ++t.vacuous;
      for (int s = 0; s < 10000; ++s) {
        Vector x(dim);
        for (std::size_t k = 0; k < dim; ++k) x[k] = rng.uniform(pr.box.lower[k], pr.box.upper[k]);
        if (!evaluate_at(e, pr.ctx, x)) {
          if (t.falsified == 0) {
            t.first = "; first falsified: " + print(*e) + " (" + std::string(to_string(out.verdict)) + ", eps " +
                      num(out.epsilon) + ", " + std::to_string(dim) + "-d " +
                      (std::holds_alternative<VisionModel>(pr.ctx.model) ? "vision" : "zero-shot") + ")";
          }
          ++t.falsified;
          break;
        }
      }
    }
  }
  return {t.bad_ce == 0 && t.falsified == 0 && t.counterexamples > 0 && t.proved > 0,
          std::to_string(t.counterexamples) + " counterexamples (worst deviation " + num(t.worst_gap) + ", " +
              std::to_string(t.bad_ce) + " invalid); " + std::to_string(t.proved) + " proved + " +
              std::to_string(t.vacuous) + " vacuous, " + std::to_string(t.falsified) + " falsified by sampling" + t.first};
}

// ---------------------------------------------------------------------------

Outcome regions_monotone() {
  testgen::Rng rng(1007);
  std::size_t violations = 0, comparisons = 0, a2_lower = 0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t dim = 2 + rng.index(4);
    auto pr = random_problem(rng, dim, true, 1.0);
    EmbeddingSet e;
    const std::size_t n = 40 + rng.index(60);
    for (std::size_t r = 0; r < n; ++r) {
      e.ids.push_back("r" + std::to_string(r));
      Vector x = rng.normal_vector(dim);
      e.matrix.push_row(x);
      const auto s = std::get<VisionModel>(pr.ctx.model).head.scores(x);
      const std::size_t pred = static_cast<std::size_t>(std::max_element(s.begin(), s.end()) - s.begin());
      e.predicted = e.predicted.value_or(std::vector<std::string>{});
      e.predicted->push_back(pr.vocab.classes()[pred]);
      e.ground_truth = e.ground_truth.value_or(std::vector<std::string>{});
      e.ground_truth->push_back(rng.coin(0.8) ? pr.vocab.classes()[pred] : pr.vocab.classes()[rng.index(3)]);
    }
    // The class with the most correct rows.
    std::size_t cls = 0;
    for (std::size_t k = 1; k < 3; ++k) {
      if (e.rows_where_correct(pr.vocab.classes()[k]).size() > e.rows_where_correct(pr.vocab.classes()[cls]).size()) cls = k;
    }
    const ClassLabel c{pr.vocab.classes()[cls], cls};
    if (e.rows_where_correct(c.name).empty()) {
      --i;
      continue;
    }
    const auto a1 = region_a1(e, c), a2 = region_a2(e, c);
    if (!a2.subset_of(a1)) ++violations;
    const auto g1 = region_gamma(e, c, 0.25), g2 = region_gamma(e, c, 1.0), g3 = region_gamma(e, c, 2.0);
    if (!g1.subset_of(g2) || !g2.subset_of(g3)) ++violations;
    const auto parts = region_a3(e, c, surrogate_partition(e, e.rows_where_predicted(c.name)));
    for (const auto& b : parts) violations += !b.subset_of(a1);

    for (int k = 0; k < 3; ++k) {
      const auto sp = spec("predict(" + c.name + ") => gt(k" + std::to_string(k) + ", k" + std::to_string(k + 1) + ")", pr.vocab);
      auto check = [&](const BoxRegion& inner, const BoxRegion& outer) {
        ++comparisons;
        const auto a = verify_spec(sp, pr.ctx, inner), b = verify_spec(sp, pr.ctx, outer);
        if (a.verdict == Verdict::VacuouslyTrue) return;
        if (b.verdict == Verdict::VacuouslyTrue || a.epsilon > b.epsilon + 1e-9) ++violations;
      };
      check(a2, a1);
      check(g1, g2);
      check(g2, g3);
      for (const auto& b : parts) check(b, a1);
      const auto ea2 = verify_spec(sp, pr.ctx, a2).epsilon, ea1 = verify_spec(sp, pr.ctx, a1).epsilon;
      a2_lower += ea2 < ea1;
    }
  }
  return {violations == 0, std::to_string(violations) + " violations over 50 instances (" + std::to_string(comparisons) +
                               " epsilon comparisons; A2 strictly lower than A1 in " + std::to_string(a2_lower) + "/150)"};
}

// ---------------------------------------------------------------------------

Outcome statistics() {
  std::vector<std::string> failures;
  const ClassLabel truck{"truck", 0};
  EmbeddingSet e;
  e.ids = {"r0", "r1", "r2", "r3"};
  e.matrix = Matrix(4, 2, std::vector<double>{1, 0, 2, 1, 1, 0.5, 0, 1});
  e.ground_truth = std::vector<std::string>(4, "truck");
  const std::vector<ConceptDirection> dirs{{"a", {1, 0}, 1}, {"b", {0, 1}, 1}, {"c", {1, 1}, 1}};
  const auto r = satisfaction_probability(e, {{"a", "b", truck}}, RepMap::vlm_only(dirs), truck);
  if (r.rates[0].probability != 0.75) failures.push_back("probability " + num(r.rates[0].probability));

  auto attr = [](std::size_t n, std::size_t k) {
    EmbeddingSet s;
    AttributeTable t{{"x"}, {}};
    for (std::size_t i = 0; i < n; ++i) {
      s.ids.push_back("r" + std::to_string(i));
      s.matrix.push_row(Vector{1});
      t.cells.push_back(i < k);
    }
    s.ground_truth = std::vector<std::string>(n, "truck");
    s.attributes = t;
    return s;
  };
  if (!relevant_concepts(attr(10, 7), truck).empty()) failures.push_back("70% counted as relevant");
  if (relevant_concepts(attr(10, 8), truck).size() != 1) failures.push_back("80% not relevant");
  if (relevant_concepts(attr(100, 71), truck).size() != 1) failures.push_back("71% not relevant");

  ValidationReport rep{truck, {}};
  rep.rates.push_back({{"a", "b", truck}, 95, 100, 0.95});
  rep.rates.push_back({{"a", "c", truck}, 96, 100, 0.96});
  rep.rates.push_back({{"b", "c", truck}, 19, 20, 19.0 / 20.0});
  const auto sig = filter_significant(rep);
  if (sig.size() != 1 || sig[0].weaker != "c" || sig[0].stronger != "a") failures.push_back("95% filter");

  std::vector<std::string> all;
  for (int i = 0; i < 18; ++i) all.push_back("k" + std::to_string(i));
  const std::vector<std::string> relevant{"k1", "k2", "k4", "k8", "k11", "k15"};
  const auto n = elicit_predicates(relevant, all, truck).size();
  if (n != 72) failures.push_back("elicited " + std::to_string(n));

  std::string detail = "p = 0.75, 70%/95% strict boundaries, 6x12 = " + std::to_string(n);
  for (const auto& f : failures) detail += "; " + f;
  return {failures.empty(), detail};
}

// ---------------------------------------------------------------------------

Outcome end_to_end() {
  testutil::TempDir dir;
  const std::filesystem::path fixture{CONSPEC_FIXTURE_DIR};
  const std::string manifest = (fixture / "manifest.json").string();
  auto p = [&](const char* name) { return (dir / name).string(); };
  std::ostringstream out, err;
  auto run = [&](std::vector<std::string> args) { return cli::run(args, out, err); };
  std::vector<std::string> failed;
  if (run({"fit-map", "--manifest", manifest, "--out", p("map.json")}) != 0) failed.push_back("fit-map");
  if (run({"directions", "--manifest", manifest, "--out", p("dirs.csv")}) != 0) failed.push_back("directions");
  if (run({"regions", "--manifest", manifest, "--class", "truck", "--region", "A2", "--out", p("regions.json")}) != 0) {
    failed.push_back("regions");
  }
  if (run({"validate", "--manifest", manifest, "--class", "truck", "--directions", p("dirs.csv"), "--out",
           p("report.csv"), "--significant", p("significant.spec")}) != 0) {
    failed.push_back("validate");
  }
  if (run({"verify", "--manifest", manifest, "--class", "truck", "--region", "A2", "--map", p("map.json"),
           "--directions", p("dirs.csv"), "--deterministic", "--specs", (fixture / "planted_true.spec").string(),
           "--specs", (fixture / "planted_false.spec").string(), "--out", p("report.jsonl")}) != 0) {
    failed.push_back("verify");
  }
  std::string detail;
  bool planted = false;
  if (failed.empty()) {
    const auto recs = load_report_jsonl(p("report.jsonl"));
    planted = recs.size() == 2 && recs[0].outcome == "Proved" && recs[1].outcome == "Counterexample";
    for (const auto& r : recs) detail += r.spec_text + " -> " + r.outcome + " (eps " + num(r.epsilon) + "); ";
  } else {
    for (const auto& f : failed) detail += f + " failed; ";
    detail += err.str();
  }
  return {failed.empty() && planted, detail};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"language correctness", 5, language},
      {"embedding-space equivalence oracle", 10, theorems},
      {"affine fit recovery", 2, affine_recovery},
      {"LP vs grid oracle", 30, lp_vs_grid},
      {"norm cancellation", 1e9, norm_cancellation},
      {"counterexample soundness", 1e9, soundness},
      {"region and monotonicity suite", 1e9, regions_monotone},
      {"statistical pipeline", 1e9, statistics},
      {"end-to-end fixture", 60, end_to_end},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string timing = num(secs) + " s";
    if (c.budget_s < 1e9) {
      timing += " of " + num(c.budget_s) + " s";
      if (secs >= c.budget_s) {
        o.pass = false;
        o.detail += "; over time budget";
      }
    }
    std::printf("%s  %s: %s [%s]\n", o.pass ? "PASS" : "FAIL", c.name.c_str(), o.detail.c_str(), timing.c_str());
    failures += !o.pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
