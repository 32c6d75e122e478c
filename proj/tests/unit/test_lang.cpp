#include <doctest.h>

#include "../support/check.hpp"
#include "../support/gen.hpp"
#include "conspec/lang.hpp"

using namespace conspec;
using namespace conspec::lang;

namespace {

TaskVocabulary vocab() { return TaskVocabulary({"wheels", "ears", "metallic"}, {"truck", "cat"}); }

Literal gt_lit(std::string a, std::string b, bool positive) {
  Literal l;
  l.kind = Literal::Kind::Gt;
  l.positive = positive;
  l.stronger = std::move(a);
  l.weaker = std::move(b);
  return l;
}

Literal predict_lit(ClassLabel c, bool positive) {
  Literal l;
  l.kind = Literal::Kind::Predict;
  l.positive = positive;
  l.cls = std::move(c);
  return l;
}

}  // namespace

TEST_CASE("parse examples") {
  const auto v = vocab();
  CHECK(equal(parse_spec("gt(wheels, ears)", v), gt("wheels", "ears")));
  CHECK(equal(parse_spec("predict(truck) => gt(wheels, ears)", v),
              implies(predict(v.class_label("truck")), gt("wheels", "ears"))));
  try {
    parse_spec("gt(wheels,", v);
    FAIL("expected a syntax error");
  } catch (const SyntaxError& e) {
    CHECK(e.offset() == 10);
    CHECK(e.kind() == ErrorKind::SyntaxError);
  }
  CHECK_ERROR_KIND(parse_spec("gt(wheels, wings)", v), UnknownName);
  CHECK_ERROR_KIND(parse_spec("predict(dog)", v), UnknownName);
  CHECK_ERROR_KIND(parse_spec("gt(wheels, ears) &&", v), SyntaxError);
  CHECK_ERROR_KIND(parse_spec("", v), SyntaxError);
  CHECK_ERROR_KIND(parse_spec("gt(wheels, ears))", v), SyntaxError);
  CHECK_ERROR_KIND(parse_spec("hasCon(wheels |)", v), SyntaxError);
}

TEST_CASE("precedence and associativity") {
  const auto v = vocab();
  const auto a = gt("wheels", "ears"), b = gt("ears", "metallic"), c = gt("metallic", "wheels");
  CHECK(equal(parse_spec("gt(wheels, ears) || gt(ears, metallic) && gt(metallic, wheels)", v), disj(a, conj(b, c))));
  CHECK(equal(parse_spec("!gt(wheels, ears) && gt(ears, metallic)", v), conj(negate(a), b)));
  CHECK(equal(parse_spec("gt(wheels, ears) => gt(ears, metallic) => gt(metallic, wheels)", v),
              implies(a, implies(b, c))));
  CHECK(equal(parse_spec("gt(wheels, ears) && gt(ears, metallic) && gt(metallic, wheels)", v), conj(conj(a, b), c)));
  CHECK(equal(parse_spec("gt(wheels, ears) || gt(ears, metallic) => gt(metallic, wheels)", v),
              implies(disj(a, b), c)));
  CHECK(equal(parse_spec("hasCon(wheels | ears, metallic)", v),
              has_con("wheels", std::vector<std::string>{"ears", "metallic"})));
}

TEST_CASE("desugar examples") {
  const auto v = vocab();
  CHECK(equal(desugar(has_con("metallic"), TaskVocabulary({"metallic", "ears", "wheels"}, {"x"})),
              conj(gt("metallic", "ears"), gt("metallic", "wheels"))));
  const auto p = gt("wheels", "ears"), q = predict(v.class_label("cat"));
  CHECK(equal(desugar(implies(p, q), v), disj(negate(p), q)));
  CHECK(equal(desugar(has_con("metallic", std::vector<std::string>{"ears"}), v), gt("metallic", "ears")));
  CHECK_ERROR_KIND(desugar(has_con("wheels"), TaskVocabulary({"wheels"}, {"x"})), EmptyContrastSet);
  CHECK(is_core(*desugar(parse_spec("hasCon(ears) => !predict(truck)", v), v)));
}

TEST_CASE("evaluate examples") {
  const auto v = vocab();
  const std::vector<double> s{0.2, 0.1};
  CHECK(evaluate(*gt("wheels", "ears"), s, {{"wheels", 0.9}, {"ears", 0.1}}));
  CHECK_FALSE(evaluate(*gt("wheels", "ears"), s, {{"wheels", 0.5}, {"ears", 0.5}}));
  CHECK_FALSE(evaluate(*predict(v.class_label("truck")), std::vector<double>{0.7, 0.7}, {}));
  CHECK(evaluate(*predict(v.class_label("truck")), std::vector<double>{0.7, 0.6}, {}));
  CHECK_ERROR_KIND(evaluate(*gt("wheels", "ears"), s, {{"wheels", 0.5}}), MissingRepValue);
}

TEST_CASE("DNF examples") {
  const auto v = vocab();
  const auto truck = v.class_label("truck");
  auto q = to_lp_queries(desugar(implies(predict(truck), gt("wheels", "ears")), v));
  REQUIRE(q.size() == 1);
  CHECK(q[0] == Clause{predict_lit(truck, true), gt_lit("wheels", "ears", false)});

  q = to_lp_queries(gt("wheels", "ears"));
  REQUIRE(q.size() == 1);
  CHECK(q[0] == Clause{gt_lit("wheels", "ears", false)});

  q = to_lp_queries(conj(gt("wheels", "ears"), gt("ears", "metallic")));
  REQUIRE(q.size() == 2);
  CHECK(q[0] == Clause{gt_lit("wheels", "ears", false)});
  CHECK(q[1] == Clause{gt_lit("ears", "metallic", false)});

  CHECK_ERROR_KIND(to_lp_queries(has_con("wheels")), InvalidArgument);
  // Not(p || !p) has no satisfiable clause.
  CHECK(to_lp_queries(disj(gt("wheels", "ears"), negate(gt("wheels", "ears")))).empty());
  CHECK(print(Clause{predict_lit(truck, true), gt_lit("wheels", "ears", false)}) ==
        "predict(truck) && !gt(wheels, ears)");
}

TEST_CASE("DNF cap") {
  const auto v = vocab();
  ExprPtr e = disj(gt("wheels", "ears"), gt("ears", "wheels"));
  for (int i = 0; i < 6; ++i) e = conj(e, disj(gt("metallic", "ears"), gt("ears", "metallic")));
  // Not(e) is a disjunction of 7 literal-clauses only, so it fits.
  CHECK(to_lp_queries(e).size() <= 64);
  ExprPtr big = conj(gt("wheels", "ears"), gt("ears", "wheels"));
  const ExprPtr unit = conj(gt("metallic", "ears"), gt("ears", "metallic"));
  for (int i = 0; i < 6; ++i) big = disj(big, unit);
  CHECK_ERROR_KIND(to_lp_queries(big, 2), ClauseExplosion);
}

TEST_CASE("spec files") {
  const auto v = vocab();
  const auto lines = parse_spec_text("# header\n\npredict(truck) => gt(wheels, ears)  # trailing\n  gt(ears, metallic)\n", v);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0].line == 3);
  CHECK(lines[0].text == "predict(truck) => gt(wheels, ears)");
  CHECK(lines[1].line == 4);
  try {
    parse_spec_text("gt(wheels, ears)\ngt(wheels,\n", v);
    FAIL("expected a syntax error");
  } catch (const SyntaxError& e) {
    CHECK(e.offset() == 10);
    const std::string what = e.what();
    CHECK(what.rfind("SyntaxError: line 2: expected concept name", 0) == 0);
    CHECK(what.find("SyntaxError", 1) == std::string::npos);
    CHECK(what.ends_with(" at offset 10"));
  }
  try {
    parse_spec_text("gt(wheels, wings)\n", v);
    FAIL("expected an unknown name");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownName);
    CHECK(std::string(e.what()) == "UnknownName: line 1: unknown concept 'wings'");
  }
}

TEST_CASE("property: parse/print round-trip") {
  testgen::Rng rng(101);
  const auto v = testgen::small_vocab();
  for (int t = 0; t < 500; ++t) {
    const auto e = testgen::random_expr(rng, v, 5);
    const auto text = print(*e);
    const auto back = parse_spec(text, v);
    CHECK_MESSAGE(equal(back, e), text);
    CHECK(print(*back) == text);
  }
}

TEST_CASE("property: desugaring preserves meaning") {
  testgen::Rng rng(102);
  const auto v = testgen::small_vocab();
  for (int t = 0; t < 500; ++t) {
    const auto e = testgen::random_expr(rng, v, 5);
    const auto d = desugar(e, v);
    CHECK(is_core(*d));
    for (int k = 0; k < 8; ++k) {
      const auto rep = testgen::random_rep(rng, v);
      const auto scores = testgen::random_scores(rng, v.classes().size());
      const bool want = testgen::reference_eval(*e, scores, rep, v);
      CHECK(evaluate(*d, scores, rep) == want);
      CHECK(evaluate(*d, scores, rep) == evaluate(*d, scores, rep));
    }
  }
}

TEST_CASE("property: DNF of the negation is sound and complete") {
  testgen::Rng rng(103);
  const auto v = testgen::small_vocab();
  for (int t = 0; t < 300; ++t) {
    const auto e = desugar(testgen::random_expr(rng, v, 4), v);
    std::vector<Clause> clauses;
    try {
      clauses = to_lp_queries(e, 4096);
    } catch (const Error&) {
      continue;
    }
    for (const auto& c : clauses) CHECK(c.size() <= 64);
    for (int k = 0; k < 8; ++k) {
      const auto rep = testgen::random_rep(rng, v);
      const auto scores = testgen::random_scores(rng, v.classes().size());
      bool any = false;
      for (const auto& c : clauses) {
        bool all = true;
        for (const auto& l : c) all = all && evaluate(l, scores, rep);
        any = any || all;
      }
      CHECK(any == !evaluate(*e, scores, rep));
    }
  }
}
