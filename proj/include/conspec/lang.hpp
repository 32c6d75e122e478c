#pragma once
// Conspec: concept-based specifications over a classifier's output and a
// concept representation map.
//
// Concrete grammar (precedence ! > && > || > =>; && and || associate left,
// => associates right):
//
//   pred := "gt(" con "," con ")" | "predict(" cls ")"
//         | "hasCon(" con [ "|" con { "," con } ] ")"
//   expr := pred | "!" expr | expr "&&" expr | expr "||" expr
//         | expr "=>" expr | "(" expr ")"
//
// hasCon and => are sugar; desugar() rewrites them into the five core forms.

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "conspec/vocab.hpp"

namespace conspec::lang {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Gt {
  std::string stronger;
  std::string weaker;
};
struct Predict {
  ClassLabel cls;
};
struct Not {
  ExprPtr operand;
};
struct And {
  ExprPtr lhs, rhs;
};
struct Or {
  ExprPtr lhs, rhs;
};
struct Implies {
  ExprPtr lhs, rhs;
};
// Contrast set absent means "every other concept in the vocabulary".
struct HasCon {
  std::string name;
  std::optional<std::vector<std::string>> contrast;
};

struct Expr {
  std::variant<Gt, Predict, Not, And, Or, Implies, HasCon> node;
};

ExprPtr gt(std::string stronger, std::string weaker);
ExprPtr predict(ClassLabel cls);
ExprPtr negate(ExprPtr e);
ExprPtr conj(ExprPtr lhs, ExprPtr rhs);
ExprPtr disj(ExprPtr lhs, ExprPtr rhs);
ExprPtr implies(ExprPtr lhs, ExprPtr rhs);
ExprPtr has_con(std::string name, std::optional<std::vector<std::string>> contrast = std::nullopt);

// Structural equality.
bool equal(const Expr& a, const Expr& b);
inline bool equal(const ExprPtr& a, const ExprPtr& b) { return equal(*a, *b); }

// Canonical text with minimal parentheses; parse(print(e)) == e.
std::string print(const Expr& e);

// True when only Gt/Predict/Not/And/Or appear.
bool is_core(const Expr& e);

ExprPtr parse_spec(std::string_view text, const TaskVocabulary& vocab);

ExprPtr desugar(const ExprPtr& e, const TaskVocabulary& vocab);

using RepValues = std::map<std::string, double, std::less<>>;

// Truth value over one input. Gt is strict; Predict(c) holds only
// when c is the unique argmax of `scores`.
bool evaluate(const Expr& e, std::span<const double> scores, const RepValues& rep_values);

// One literal of a conjunctive clause.
struct Literal {
  enum class Kind { Gt, Predict };
  Kind kind = Kind::Gt;
  bool positive = true;
  std::string stronger;  // Gt
  std::string weaker;    // Gt
  ClassLabel cls;        // Predict

  friend bool operator==(const Literal&, const Literal&) = default;
};
using Clause = std::vector<Literal>;

std::string print(const Literal& l);
std::string print(const Clause& c);
bool evaluate(const Literal& l, std::span<const double> scores, const RepValues& rep_values);

inline constexpr std::size_t kDefaultClauseCap = 64;

// Disjunctive normal form of Not(e): Not(e) holds iff some clause has all
// literals true. Duplicate literals are merged and clauses containing a
// literal together with its complement are dropped.
std::vector<Clause> to_lp_queries(const ExprPtr& e, std::size_t cap = kDefaultClauseCap);

// Spec files: one specification per line, '#' starts a comment.
struct SpecLine {
  std::size_t line = 0;
  std::string text;
  ExprPtr expr;
};
std::vector<SpecLine> parse_spec_text(std::string_view text, const TaskVocabulary& vocab);
std::vector<SpecLine> load_spec_file(const std::filesystem::path& path, const TaskVocabulary& vocab);

}  // namespace conspec::lang
