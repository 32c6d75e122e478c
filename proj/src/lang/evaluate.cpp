#include "../overloaded.hpp"
#include "conspec/error.hpp"
#include "conspec/lang.hpp"

namespace conspec::lang {

using detail::overloaded;

namespace {

double rep_of(const RepValues& rep_values, const std::string& name) {
  const auto it = rep_values.find(name);
  if (it == rep_values.end()) throw Error(ErrorKind::MissingRepValue, "no rep value for concept '" + name + "'");
  return it->second;
}

bool unique_argmax(std::span<const double> scores, std::size_t index) {
  if (index >= scores.size()) {
    throw Error(ErrorKind::DimMismatch, "class index " + std::to_string(index) + " outside score vector of size " +
                                            std::to_string(scores.size()));
  }
  for (std::size_t k = 0; k < scores.size(); ++k) {
    if (k != index && !(scores[index] > scores[k])) return false;
  }
  return true;
}

}  // namespace

bool evaluate(const Expr& e, std::span<const double> scores, const RepValues& rep_values) {
  return std::visit(
      overloaded{
          [&](const Gt& g) { return rep_of(rep_values, g.stronger) > rep_of(rep_values, g.weaker); },
          [&](const Predict& p) { return unique_argmax(scores, p.cls.index); },
          [&](const Not& n) { return !evaluate(*n.operand, scores, rep_values); },
          [&](const And& a) {
            // Both sides are evaluated so missing values surface regardless of order.
            const bool l = evaluate(*a.lhs, scores, rep_values);
            const bool r = evaluate(*a.rhs, scores, rep_values);
            return l && r;
          },
          [&](const Or& o) {
            const bool l = evaluate(*o.lhs, scores, rep_values);
            const bool r = evaluate(*o.rhs, scores, rep_values);
            return l || r;
          },
          [&](const Implies&) -> bool {
            throw Error(ErrorKind::InvalidArgument, "evaluate() needs a desugared expression");
          },
          [&](const HasCon&) -> bool {
            throw Error(ErrorKind::InvalidArgument, "evaluate() needs a desugared expression");
          },
      },
      e.node);
}

bool evaluate(const Literal& l, std::span<const double> scores, const RepValues& rep_values) {
  const bool atom = l.kind == Literal::Kind::Gt ? rep_of(rep_values, l.stronger) > rep_of(rep_values, l.weaker)
                                                : unique_argmax(scores, l.cls.index);
  return l.positive ? atom : !atom;
}

}  // namespace conspec::lang
