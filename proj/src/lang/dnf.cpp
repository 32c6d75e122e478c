#include <algorithm>

#include "../overloaded.hpp"
#include "conspec/error.hpp"
#include "conspec/lang.hpp"

namespace conspec::lang {

using detail::overloaded;

namespace {

bool complementary(const Literal& a, const Literal& b) {
  if (a.kind != b.kind || a.positive == b.positive) return false;
  return a.kind == Literal::Kind::Gt ? (a.stronger == b.stronger && a.weaker == b.weaker) : a.cls == b.cls;
}

// Merges duplicate literals; returns false when the clause is contradictory.
bool normalize(Clause& c) {
  Clause out;
  for (const auto& l : c) {
    if (std::find(out.begin(), out.end(), l) != out.end()) continue;
    for (const auto& m : out) {
      if (complementary(l, m)) return false;
    }
    out.push_back(l);
  }
  c = std::move(out);
  return true;
}

class DnfBuilder {
 public:
  explicit DnfBuilder(std::size_t cap) : cap_(cap) {}

  // Clauses whose disjunction is equivalent to e (positive) or Not(e).
  std::vector<Clause> build(const Expr& e, bool positive) {
    return std::visit(
        overloaded{
            [&](const Gt& g) {
              Literal l;
              l.kind = Literal::Kind::Gt;
              l.positive = positive;
              l.stronger = g.stronger;
              l.weaker = g.weaker;
              return std::vector<Clause>{{l}};
            },
            [&](const Predict& p) {
              Literal l;
              l.kind = Literal::Kind::Predict;
              l.positive = positive;
              l.cls = p.cls;
              return std::vector<Clause>{{l}};
            },
            [&](const Not& n) { return build(*n.operand, !positive); },
            [&](const And& a) {
              return positive ? product(build(*a.lhs, true), build(*a.rhs, true))
                              : merge(build(*a.lhs, false), build(*a.rhs, false));
            },
            [&](const Or& o) {
              return positive ? merge(build(*o.lhs, true), build(*o.rhs, true))
                              : product(build(*o.lhs, false), build(*o.rhs, false));
            },
            [&](const Implies&) -> std::vector<Clause> {
              throw Error(ErrorKind::InvalidArgument, "to_lp_queries() needs a desugared expression");
            },
            [&](const HasCon&) -> std::vector<Clause> {
              throw Error(ErrorKind::InvalidArgument, "to_lp_queries() needs a desugared expression");
            },
        },
        e.node);
  }

 private:
  void check(std::size_t n) const {
    if (n > cap_) {
      throw Error(ErrorKind::ClauseExplosion,
                  "DNF needs more than " + std::to_string(cap_) + " clauses");
    }
  }

  std::vector<Clause> merge(std::vector<Clause> a, std::vector<Clause> b) const {
    for (auto& c : b) {
      if (std::find(a.begin(), a.end(), c) == a.end()) a.push_back(std::move(c));
    }
    check(a.size());
    return a;
  }

  std::vector<Clause> product(const std::vector<Clause>& a, const std::vector<Clause>& b) const {
    std::vector<Clause> out;
    for (const auto& x : a) {
      for (const auto& y : b) {
        Clause c = x;
        c.insert(c.end(), y.begin(), y.end());
        if (!normalize(c)) continue;
        if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(std::move(c));
        check(out.size());
      }
    }
    return out;
  }

  std::size_t cap_;
};

}  // namespace

std::vector<Clause> to_lp_queries(const ExprPtr& e, std::size_t cap) {
  return DnfBuilder(cap).build(*e, false);
}

}  // namespace conspec::lang
