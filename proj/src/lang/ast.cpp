#include <type_traits>

#include "conspec/lang.hpp"
#include "../overloaded.hpp"

namespace conspec::lang {

namespace {

template <class T>
ExprPtr make(T node) {
  return std::make_shared<const Expr>(Expr{std::move(node)});
}

using detail::overloaded;

enum Precedence { kImplies = 1, kOr = 2, kAnd = 3, kNot = 4, kAtom = 5 };

int precedence(const Expr& e) {
  return std::visit(overloaded{
                        [](const Implies&) { return int{kImplies}; },
                        [](const Or&) { return int{kOr}; },
                        [](const And&) { return int{kAnd}; },
                        [](const Not&) { return int{kNot}; },
                        [](const auto&) { return int{kAtom}; },
                    },
                    e.node);
}

void print_to(const Expr& e, std::string& out);

void print_child(const Expr& e, std::string& out, int min_prec) {
  if (precedence(e) < min_prec) {
    out += '(';
    print_to(e, out);
    out += ')';
  } else {
    print_to(e, out);
  }
}

void print_to(const Expr& e, std::string& out) {
  std::visit(overloaded{
                 [&](const Gt& g) { out += "gt(" + g.stronger + ", " + g.weaker + ")"; },
                 [&](const Predict& p) { out += "predict(" + p.cls.name + ")"; },
                 [&](const HasCon& h) {
                   out += "hasCon(" + h.name;
                   if (h.contrast) {
                     out += " | ";
                     for (std::size_t i = 0; i < h.contrast->size(); ++i) {
                       if (i) out += ", ";
                       out += (*h.contrast)[i];
                     }
                   }
                   out += ")";
                 },
                 [&](const Not& n) {
                   out += '!';
                   print_child(*n.operand, out, kNot);
                 },
                 [&](const And& a) {
                   print_child(*a.lhs, out, kAnd);
                   out += " && ";
                   print_child(*a.rhs, out, kAnd + 1);
                 },
                 [&](const Or& o) {
                   print_child(*o.lhs, out, kOr);
                   out += " || ";
                   print_child(*o.rhs, out, kOr + 1);
                 },
                 [&](const Implies& i) {
                   print_child(*i.lhs, out, kImplies + 1);
                   out += " => ";
                   print_child(*i.rhs, out, kImplies);
                 },
             },
             e.node);
}

}  // namespace

ExprPtr gt(std::string stronger, std::string weaker) { return make(Gt{std::move(stronger), std::move(weaker)}); }
ExprPtr predict(ClassLabel cls) { return make(Predict{std::move(cls)}); }
ExprPtr negate(ExprPtr e) { return make(Not{std::move(e)}); }
ExprPtr conj(ExprPtr lhs, ExprPtr rhs) { return make(And{std::move(lhs), std::move(rhs)}); }
ExprPtr disj(ExprPtr lhs, ExprPtr rhs) { return make(Or{std::move(lhs), std::move(rhs)}); }
ExprPtr implies(ExprPtr lhs, ExprPtr rhs) { return make(Implies{std::move(lhs), std::move(rhs)}); }
ExprPtr has_con(std::string name, std::optional<std::vector<std::string>> contrast) {
  return make(HasCon{std::move(name), std::move(contrast)});
}

bool equal(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const T& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, Gt>) {
          return x.stronger == y.stronger && x.weaker == y.weaker;
        } else if constexpr (std::is_same_v<T, Predict>) {
          return x.cls == y.cls;
        } else if constexpr (std::is_same_v<T, HasCon>) {
          return x.name == y.name && x.contrast == y.contrast;
        } else if constexpr (std::is_same_v<T, Not>) {
          return equal(*x.operand, *y.operand);
        } else {
          return equal(*x.lhs, *y.lhs) && equal(*x.rhs, *y.rhs);
        }
      },
      a.node);
}

std::string print(const Expr& e) {
  std::string out;
  print_to(e, out);
  return out;
}

bool is_core(const Expr& e) {
  return std::visit(overloaded{
                        [](const Gt&) { return true; },
                        [](const Predict&) { return true; },
                        [](const HasCon&) { return false; },
                        [](const Implies&) { return false; },
                        [](const Not& n) { return is_core(*n.operand); },
                        [](const And& a) { return is_core(*a.lhs) && is_core(*a.rhs); },
                        [](const Or& o) { return is_core(*o.lhs) && is_core(*o.rhs); },
                    },
                    e.node);
}

std::string print(const Literal& l) {
  std::string atom = l.kind == Literal::Kind::Gt ? "gt(" + l.stronger + ", " + l.weaker + ")"
                                                 : "predict(" + l.cls.name + ")";
  return l.positive ? atom : "!" + atom;
}

std::string print(const Clause& c) {
  std::string out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i) out += " && ";
    out += print(c[i]);
  }
  return out.empty() ? "true" : out;
}

}  // namespace conspec::lang
