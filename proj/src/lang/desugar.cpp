#include "../overloaded.hpp"
#include "conspec/error.hpp"
#include "conspec/lang.hpp"

namespace conspec::lang {

using detail::overloaded;

// hasCon(con | S) := AND over con_i in S, con_i != con, of gt(con, con_i).
// Implies(a, b) := Or(Not(a), b).
ExprPtr desugar(const ExprPtr& e, const TaskVocabulary& vocab) {
  return std::visit(
      overloaded{
          [&](const Gt&) { return e; },
          [&](const Predict&) { return e; },
          [&](const Not& n) { return negate(desugar(n.operand, vocab)); },
          [&](const And& a) { return conj(desugar(a.lhs, vocab), desugar(a.rhs, vocab)); },
          [&](const Or& o) { return disj(desugar(o.lhs, vocab), desugar(o.rhs, vocab)); },
          [&](const Implies& i) { return disj(negate(desugar(i.lhs, vocab)), desugar(i.rhs, vocab)); },
          [&](const HasCon& h) {
            const std::vector<std::string>& pool = h.contrast ? *h.contrast : vocab.concepts();
            ExprPtr acc;
            for (const auto& other : pool) {
              if (other == h.name) continue;
              ExprPtr atom = gt(h.name, other);
              acc = acc ? conj(std::move(acc), std::move(atom)) : std::move(atom);
            }
            if (!acc) throw Error(ErrorKind::EmptyContrastSet, "hasCon(" + h.name + ") has no contrast concepts");
            return acc;
          },
      },
      e->node);
}

}  // namespace conspec::lang
