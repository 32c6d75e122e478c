#include "conspec/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "conspec/error.hpp"
#include "conspec/parallel.hpp"
#include "conspec/simd.hpp"
#include "overloaded.hpp"

namespace conspec {

using detail::overloaded;
using lang::Clause;
using lang::Literal;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_scope(const FiniteScope& scope) {
  if (scope.points.empty()) throw Error(ErrorKind::InvalidArgument, "empty scope");
  for (const auto& p : scope.points) {
    if (p.size() != scope.points[0].size()) throw Error(ErrorKind::InvalidArgument, "scope points differ in dim");
  }
}

template <typename Table>
const typename Table::mapped_type& lookup(const Table& t, const Vector& x, const char* what) {
  const auto it = t.find(x);
  if (it == t.end()) throw Error(ErrorKind::MissingPoint, std::string(what) + " table has no entry for a scope point");
  return it->second;
}

std::vector<Vector> distinct_embeddings(const FiniteScope& scope, const EncoderTable& enc) {
  std::set<Vector> seen;
  for (const auto& x : scope.points) seen.insert(lookup(enc, x, "encoder"));
  return {seen.begin(), seen.end()};
}

Vector one_hot(std::size_t k, std::size_t n) {
  Vector v(n, 0.0);
  v[k] = 1.0;
  return v;
}

Vector unit(std::span<const double> q) {
  const double n = norm(q);
  if (!(n > 0)) throw Error(ErrorKind::ZeroVector, "zero direction");
  Vector out(q.begin(), q.end());
  for (double& v : out) v /= n;
  return out;
}

// Direct per-point semantics used by the grid, written against the model
// rather than the LP encoding.
class PointEvaluator {
 public:
  PointEvaluator(const Clause& clause, const VerificationContext& ctx) : ctx_(ctx) {
    for (const Literal& l : clause) {
      if (l.kind == Literal::Kind::Gt) {
        strength_.push_back(l);
        for (const auto* name : {&l.stronger, &l.weaker}) {
          const auto it = ctx.concepts.find(*name);
          if (it == ctx.concepts.end()) throw Error(ErrorKind::UnknownConcept, "no direction for '" + *name + "'");
          units_.emplace(*name, unit(it->second));
        }
      } else {
        if (l.cls.index >= ctx.num_classes()) throw Error(ErrorKind::DimMismatch, "class index out of range");
        (l.positive ? positive_ : negative_).insert(l.cls.index);
      }
    }
    if (const auto* zs = std::get_if<ZeroShotModel>(&ctx.model)) {
      for (const auto& d : zs->class_dirs) class_units_.push_back(unit(d));
    }
    // Two distinct predicted classes cannot both be the strict argmax.
    contradictory_ = positive_.size() > 1;
  }

  bool has_strength() const { return !strength_.empty(); }
  bool contradictory() const { return contradictory_; }

  // Violation slack at x, or nullopt when a classification literal fails.
  std::optional<double> operator()(std::span<const double> x) const {
    const Vector z = ctx_.to_vlm(x);
    const Vector scores = class_scores(x, z);
    auto dominant = [&](std::size_t c) {
      for (std::size_t k = 0; k < scores.size(); ++k) {
        if (scores[k] > scores[c]) return false;
      }
      return true;
    };
    for (std::size_t c : positive_) {
      if (!dominant(c)) return std::nullopt;
    }
    if (!negative_.empty()) {
      bool other = false;
      for (std::size_t c = 0; c < scores.size() && !other; ++c) other = !negative_.count(c) && dominant(c);
      if (!other) return std::nullopt;
    }
    double eps = kInf;
    for (const Literal& l : strength_) {
      const double a = simd::dot(units_.at(l.stronger), z);
      const double b = simd::dot(units_.at(l.weaker), z);
      eps = std::min(eps, l.positive ? a - b : b - a);
    }
    return eps;
  }

 private:
  Vector class_scores(std::span<const double> x, const Vector& z) const {
    if (const auto* vm = std::get_if<VisionModel>(&ctx_.model)) return vm->head.scores(x);
    Vector s(class_units_.size());
    for (std::size_t k = 0; k < s.size(); ++k) s[k] = simd::dot(class_units_[k], z);
    return s;
  }

  const VerificationContext& ctx_;
  std::vector<Literal> strength_;
  std::map<std::string, Vector> units_;
  std::vector<Vector> class_units_;
  std::set<std::size_t> positive_, negative_;
  bool contradictory_ = false;
};

std::vector<double> axis(double lo, double hi, double step) {
  std::vector<double> out;
  const double span = hi - lo;
  const auto k = static_cast<std::size_t>(std::floor(span / step + 1e-9));
  out.reserve(k + 2);
  for (std::size_t i = 0; i <= k; ++i) out.push_back(std::min(hi, lo + static_cast<double>(i) * step));
  if (out.back() < hi) out.push_back(hi);
  return out;
}

}  // namespace

bool brute_force_satisfaction(const lang::Expr& e, const ScoreTable& f, const RepTable& rep,
                              const FiniteScope& scope) {
  check_scope(scope);
  bool all = true;
  for (const auto& x : scope.points) {
    const Vector& scores = lookup(f, x, "score");
    const lang::RepValues& values = lookup(rep, x, "rep");
    if (!lang::evaluate(e, scores, values)) all = false;
  }
  return all;
}

bool theorem1_check(const lang::ExprPtr& e, const FiniteScope& scope, const EncoderTable& enc,
                    const LinearHead& head, const RepMap& rep) {
  check_scope(scope);
  if (!rep.map) throw Error(ErrorKind::InvalidArgument, "theorem1_check needs a rep map with an affine map");
  const RepMap via = RepMap{RepMode::ViaAffine, rep.directions, rep.map};
  const RepMap hat = RepMap{RepMode::HatOnEmbeddings, rep.directions, rep.map};

  ScoreTable f;
  RepTable r;
  for (const auto& x : scope.points) {
    const Vector& v = lookup(enc, x, "encoder");
    f[x] = head.scores(v);
    r[x] = rep_values(via, v);
  }
  const bool lhs = brute_force_satisfaction(*e, f, r, scope);

  FiniteScope image{distinct_embeddings(scope, enc)};
  ScoreTable f_hat;
  RepTable r_hat;
  for (const auto& v : image.points) {
    f_hat[v] = head.scores(v);
    r_hat[v] = rep_values(hat, v);
  }
  const bool rhs = brute_force_satisfaction(*e, f_hat, r_hat, image);
  return lhs == rhs;
}

bool theorem2_check(const lang::ExprPtr& e, const FiniteScope& scope, const EncoderTable& enc,
                    std::span<const ConceptDirection> class_dirs, const RepMap& rep) {
  check_scope(scope);
  const RepMap vlm = RepMap{RepMode::VlmOnly, rep.directions, std::nullopt};
  const RepMap hat = RepMap{RepMode::HatOnEmbeddings, rep.directions, std::nullopt};
  auto head = [&](const Vector& v) { return one_hot(zero_shot_classify(v, class_dirs).index, class_dirs.size()); };

  ScoreTable f;
  RepTable r;
  for (const auto& x : scope.points) {
    const Vector& v = lookup(enc, x, "encoder");
    f[x] = head(v);
    r[x] = rep_values(vlm, v);
  }
  const bool lhs = brute_force_satisfaction(*e, f, r, scope);

  FiniteScope image{distinct_embeddings(scope, enc)};
  ScoreTable f_hat;
  RepTable r_hat;
  for (const auto& v : image.points) {
    f_hat[v] = head(v);
    r_hat[v] = rep_values(hat, v);
  }
  const bool rhs = brute_force_satisfaction(*e, f_hat, r_hat, image);
  return lhs == rhs;
}

GridResult grid_violation_oracle(const Clause& clause, const VerificationContext& ctx, const BoxRegion& box,
                                 double step, std::size_t jobs) {
  if (!(step > 0) || !std::isfinite(step)) throw Error(ErrorKind::InvalidArgument, "grid step must be positive");
  const std::size_t p = box.dim();
  if (p == 0 || p > 4) throw Error(ErrorKind::InvalidArgument, "grid oracle supports dims 1 to 4");
  if (p != ctx.input_dim()) throw Error(ErrorKind::DimMismatch, "box dim differs from model input dim");

  std::vector<std::vector<double>> axes;
  double total = 1;
  for (std::size_t i = 0; i < p; ++i) {
    if (!(box.upper[i] - box.lower[i] <= static_cast<double>(kMaxGridPoints) * step)) {
      throw Error(ErrorKind::GridTooLarge, "grid exceeds " + std::to_string(kMaxGridPoints) + " points");
    }
    axes.push_back(axis(box.lower[i], box.upper[i], step));
    total *= static_cast<double>(axes.back().size());
  }
  if (total > static_cast<double>(kMaxGridPoints)) {
    throw Error(ErrorKind::GridTooLarge, "grid of " + std::to_string(static_cast<std::size_t>(total)) +
                                             " points exceeds " + std::to_string(kMaxGridPoints));
  }

  const PointEvaluator eval(clause, ctx);
  GridResult result;
  result.evaluated = static_cast<std::size_t>(total);
  if (eval.contradictory()) return result;

  // Chunks follow the first axis; the reduction keeps the first maximum in
  // lexicographic grid order.
  const std::size_t chunks = axes[0].size();
  std::vector<GridResult> partial(chunks);
  parallel_for(chunks, jobs, [&](std::size_t c) {
    GridResult& best = partial[c];
    Vector x(p);
    x[0] = axes[0][c];
    std::vector<std::size_t> idx(p, 0);
    for (;;) {
      for (std::size_t i = 1; i < p; ++i) x[i] = axes[i][idx[i]];
      if (const auto eps = eval(x)) {
        if (!best.feasible || *eps > best.epsilon) {
          best.feasible = true;
          best.epsilon = *eps;
          best.point = x;
        }
      }
      std::size_t i = p;
      while (i-- > 1) {
        if (++idx[i] < axes[i].size()) break;
        idx[i] = 0;
      }
      if (i == 0 || p == 1) break;
    }
  });
  for (auto& part : partial) {
    if (part.feasible && (!result.feasible || part.epsilon > result.epsilon)) {
      result.feasible = true;
      result.epsilon = part.epsilon;
      result.point = std::move(part.point);
    }
  }
  return result;
}

double grid_tolerance(const Clause& clause, const VerificationContext& ctx, double step) {
  double worst = 0;
  for (const Literal& l : clause) {
    if (l.kind != Literal::Kind::Gt) continue;
    const LinearForm a = concept_form(ctx, l.stronger);
    const LinearForm b = concept_form(ctx, l.weaker);
    double l1 = 0;
    for (std::size_t i = 0; i < a.s.size(); ++i) l1 += std::abs(a.s[i] - b.s[i]);
    worst = std::max(worst, l1);
  }
  return step * worst;
}

VerificationContext project_context(const VerificationContext& ctx, std::span<const std::size_t> dims,
                                    std::span<const double> base) {
  const std::size_t p = ctx.input_dim();
  if (base.size() != p) throw Error(ErrorKind::DimMismatch, "base point dim differs from model input dim");
  std::vector<bool> keep(p, false);
  for (std::size_t d : dims) {
    if (d >= p || keep[d]) throw Error(ErrorKind::InvalidArgument, "projection dims must be distinct and in range");
    keep[d] = true;
  }
  VisionModel vm = std::visit(overloaded{[](const VisionModel& v) { return v; },
                                         [&](const ZeroShotModel& z) {
                                           VisionModel v;
                                           v.head.a = Matrix(z.class_dirs.size(), p);
                                           v.head.b.assign(z.class_dirs.size(), 0.0);
                                           for (std::size_t k = 0; k < z.class_dirs.size(); ++k) {
                                             const Vector u = unit(z.class_dirs[k]);
                                             std::copy(u.begin(), u.end(), v.head.a.row(k).begin());
                                           }
                                           for (std::size_t k = 0; k < z.class_dirs.size(); ++k) {
                                             v.head.classes.push_back(ctx.class_name(k));
                                           }
                                           v.map = AffineMap{Matrix::identity(p), Vector(p, 0.0)};
                                           return v;
                                         }},
                              ctx.model);

  auto restrict_cols = [&](const Matrix& m, Vector& offset) {
    Matrix out(m.rows(), dims.size());
    for (std::size_t r = 0; r < m.rows(); ++r) {
      for (std::size_t j = 0; j < dims.size(); ++j) out(r, j) = m(r, dims[j]);
      for (std::size_t i = 0; i < p; ++i) {
        if (!keep[i]) offset[r] += m(r, i) * base[i];
      }
    }
    return out;
  };
  VisionModel projected;
  projected.head.b = vm.head.b;
  projected.head.a = restrict_cols(vm.head.a, projected.head.b);
  projected.head.classes = vm.head.classes;
  projected.map.d = vm.map.d;
  projected.map.m = restrict_cols(vm.map.m, projected.map.d);
  return VerificationContext{std::move(projected), ctx.concepts, ctx.solver};
}

BoxRegion project_box(const BoxRegion& box, std::span<const std::size_t> dims) {
  BoxRegion out;
  out.provenance = box.provenance;
  out.cls = box.cls;
  for (std::size_t d : dims) {
    if (d >= box.dim()) throw Error(ErrorKind::InvalidArgument, "projection dim out of range");
    out.lower.push_back(box.lower[d]);
    out.upper.push_back(box.upper[d]);
  }
  return out;
}

std::vector<AuditRow> audit_projection(const lang::ExprPtr& e, const VerificationContext& ctx, const BoxRegion& box,
                                       std::span<const std::size_t> dims, std::span<const double> base,
                                       double step, std::size_t jobs) {
  const VerificationContext sub = project_context(ctx, dims, base);
  const BoxRegion sub_box = project_box(box, dims);
  std::vector<AuditRow> rows;
  for (const Clause& clause : lang::to_lp_queries(e)) {
    for (const Clause& c : expand_negated_predicts(clause, sub)) {
      AuditRow row;
      row.clause = lang::print(c);
      const bool has_strength =
          std::any_of(c.begin(), c.end(), [](const Literal& l) { return l.kind == Literal::Kind::Gt; });
      const LpResult lp = solve_lp_max(encode_query(c, sub, sub_box));
      row.lp_feasible = lp.status == LpStatus::Optimal;
      row.lp_epsilon = row.lp_feasible ? (has_strength ? lp.point[dims.size()] : kInf) : -kInf;
      const GridResult g = grid_violation_oracle(c, sub, sub_box, step, jobs);
      row.grid_feasible = g.feasible;
      row.grid_epsilon = g.feasible ? g.epsilon : -kInf;
      row.tolerance = grid_tolerance(c, sub, step);
      if (!row.grid_feasible) {
        row.consistent = true;
      } else if (!row.lp_feasible) {
        row.consistent = false;
      } else if (std::isinf(row.lp_epsilon) || std::isinf(row.grid_epsilon)) {
        row.consistent = row.lp_epsilon == row.grid_epsilon;
      } else {
        row.consistent = row.grid_epsilon <= row.lp_epsilon + 1e-9 &&
                         row.lp_epsilon - row.grid_epsilon <= row.tolerance + 1e-9;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace conspec
