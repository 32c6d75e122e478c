#include <cctype>

#include "conspec/error.hpp"
#include "conspec/lang.hpp"

namespace conspec::lang {

namespace {

enum class Tok { Name, LParen, RParen, Comma, Bar, Bang, AndAnd, OrOr, Arrow, End };

struct Token {
  Tok kind;
  std::size_t offset;
  std::string_view text;
};

bool name_char(char ch) {
  return std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_';
}

std::string describe(const Token& t) {
  return t.kind == Tok::End ? std::string("end of input") : "'" + std::string(t.text) + "'";
}

class Parser {
 public:
  Parser(std::string_view text, const TaskVocabulary& vocab) : text_(text), vocab_(vocab) { advance(); }

  ExprPtr parse() {
    ExprPtr e = parse_implies();
    if (cur_.kind != Tok::End) fail("unexpected " + describe(cur_));
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(cur_.offset, msg); }

  void advance() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::size_t start = pos_;
    if (pos_ >= text_.size()) {
      cur_ = {Tok::End, start, {}};
      return;
    }
    auto two = [&](std::string_view s) { return text_.substr(pos_, 2) == s; };
    auto single = [&](Tok k) {
      ++pos_;
      cur_ = {k, start, text_.substr(start, 1)};
    };
    const char ch = text_[pos_];
    if (name_char(ch)) {
      while (pos_ < text_.size() && name_char(text_[pos_])) ++pos_;
      cur_ = {Tok::Name, start, text_.substr(start, pos_ - start)};
    } else if (two("&&")) {
      pos_ += 2;
      cur_ = {Tok::AndAnd, start, text_.substr(start, 2)};
    } else if (two("||")) {
      pos_ += 2;
      cur_ = {Tok::OrOr, start, text_.substr(start, 2)};
    } else if (two("=>")) {
      pos_ += 2;
      cur_ = {Tok::Arrow, start, text_.substr(start, 2)};
    } else if (ch == '(') {
      single(Tok::LParen);
    } else if (ch == ')') {
      single(Tok::RParen);
    } else if (ch == ',') {
      single(Tok::Comma);
    } else if (ch == '|') {
      single(Tok::Bar);
    } else if (ch == '!') {
      single(Tok::Bang);
    } else {
      throw SyntaxError(start, "unexpected character '" + std::string(1, ch) + "'");
    }
  }

  void expect(Tok k, const char* what) {
    if (cur_.kind != k) fail(std::string("expected ") + what + ", found " + describe(cur_));
    advance();
  }

  ExprPtr parse_implies() {
    ExprPtr lhs = parse_or();
    if (cur_.kind == Tok::Arrow) {
      advance();
      return implies(std::move(lhs), parse_implies());
    }
    return lhs;
  }

  ExprPtr parse_or() {
    ExprPtr lhs = parse_and();
    while (cur_.kind == Tok::OrOr) {
      advance();
      lhs = disj(std::move(lhs), parse_and());
    }
    return lhs;
  }

  ExprPtr parse_and() {
    ExprPtr lhs = parse_unary();
    while (cur_.kind == Tok::AndAnd) {
      advance();
      lhs = conj(std::move(lhs), parse_unary());
    }
    return lhs;
  }

  ExprPtr parse_unary() {
    if (cur_.kind == Tok::Bang) {
      advance();
      return negate(parse_unary());
    }
    if (cur_.kind == Tok::LParen) {
      advance();
      ExprPtr e = parse_implies();
      expect(Tok::RParen, "')'");
      return e;
    }
    return parse_predicate();
  }

  std::string concept_name() {
    if (cur_.kind != Tok::Name) fail("expected concept name, found " + describe(cur_));
    std::string name(cur_.text);
    if (!vocab_.has_concept(name)) throw Error(ErrorKind::UnknownName, "unknown concept '" + name + "'");
    advance();
    return name;
  }

  ExprPtr parse_predicate() {
    if (cur_.kind != Tok::Name) fail("expected predicate, found " + describe(cur_));
    const std::string_view head = cur_.text;
    if (head != "gt" && head != "predict" && head != "hasCon") {
      fail("unknown predicate '" + std::string(head) + "'");
    }
    advance();
    expect(Tok::LParen, "'('");
    ExprPtr result;
    if (head == "gt") {
      std::string a = concept_name();
      expect(Tok::Comma, "','");
      std::string b = concept_name();
      result = gt(std::move(a), std::move(b));
    } else if (head == "predict") {
      if (cur_.kind != Tok::Name) fail("expected class name, found " + describe(cur_));
      ClassLabel cls = vocab_.class_label(cur_.text);
      advance();
      result = predict(std::move(cls));
    } else {
      std::string name = concept_name();
      std::optional<std::vector<std::string>> contrast;
      if (cur_.kind == Tok::Bar) {
        advance();
        contrast.emplace();
        contrast->push_back(concept_name());
        while (cur_.kind == Tok::Comma) {
          advance();
          contrast->push_back(concept_name());
        }
      }
      result = has_con(std::move(name), std::move(contrast));
    }
    expect(Tok::RParen, "')'");
    return result;
  }

  std::string_view text_;
  const TaskVocabulary& vocab_;
  std::size_t pos_ = 0;
  Token cur_{Tok::End, 0, {}};
};

}  // namespace

ExprPtr parse_spec(std::string_view text, const TaskVocabulary& vocab) { return Parser(text, vocab).parse(); }

}  // namespace conspec::lang
