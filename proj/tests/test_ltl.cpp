#include "doctest.h"

#include <string>

#include "mdpst/ltl.hpp"
#include "mdpst/oracle.hpp"

using namespace mdpst;

namespace {

LabelSet letter(std::initializer_list<const char*> atoms) {
  LabelSet l;
  for (auto a : atoms) l.atoms.insert(a);
  return l;
}

bool holds(const std::string& formula, const Lasso& w) {
  return eval_lasso(parse_ltl(formula), w);
}

}  // namespace

TEST_SUITE("ltl") {

TEST_CASE("parser handles precedence and associativity") {
  CHECK(ltl_to_string(parse_ltl("a & b | c")) == ltl_to_string(parse_ltl("(a & b) | c")));
  CHECK(ltl_to_string(parse_ltl("a -> b | c")) == ltl_to_string(parse_ltl("a -> (b | c)")));
  CHECK(ltl_to_string(parse_ltl("a U b U c")) == ltl_to_string(parse_ltl("a U (b U c)")));
  CHECK(ltl_to_string(parse_ltl("a U b & c")) == ltl_to_string(parse_ltl("(a U b) & c")));
  CHECK(ltl_to_string(parse_ltl("!a & b")) == ltl_to_string(parse_ltl("(!a) & b")));
  CHECK(ltl_to_string(parse_ltl("G F a")) == ltl_to_string(parse_ltl("G (F a)")));
  CHECK(ltl_to_string(parse_ltl("X X a")) == ltl_to_string(parse_ltl("X (X a)")));
}

TEST_CASE("printer output reparses to the same tree") {
  for (auto text : {"true", "a", "!a", "a & b", "a | !b", "a -> b", "X a", "a U b",
                    "F (a & b)", "G !obs", "(G F b1) & (G F b2)", "a U (b U c)",
                    "F G (a | b)", "!(a U b)"}) {
    auto first = parse_ltl(text);
    auto printed = ltl_to_string(first);
    CHECK(ltl_to_string(parse_ltl(printed)) == printed);
  }
}

TEST_CASE("parse errors carry a position") {
  for (auto text : {"", "a &", "U b", "(a", "a b", "a & & b", "G"}) {
    CHECK_THROWS_AS(parse_ltl(text), LtlParseError);
  }
  try {
    parse_ltl("a & & b");
  } catch (const LtlParseError& err) {
    CHECK(err.position > 0);
  }
}

TEST_CASE("atoms are collected without duplicates") {
  auto atoms = ltl_atoms(parse_ltl("(a U b) & (F a) & !c"));
  CHECK(atoms == std::vector<std::string>{"a", "b", "c"});
  CHECK(ltl_atoms(parse_ltl("true")).empty());
}

TEST_CASE("lasso evaluation on hand-checked cases") {
  Lasso always_a{{}, {letter({"a"})}};
  Lasso never_a{{}, {letter({})}};
  Lasso blink{{}, {letter({"a"}), letter({})}};
  Lasso a_then_none{{letter({"a"})}, {letter({})}};

  CHECK(holds("G F a", always_a));
  CHECK_FALSE(holds("G F a", never_a));
  CHECK(holds("G F a", blink));
  CHECK_FALSE(holds("G F a", a_then_none));
  CHECK_FALSE(holds("G a", blink));
  CHECK(holds("F a", blink));
  CHECK(holds("F a", a_then_none));
  CHECK_FALSE(holds("F G a", blink));
  CHECK(holds("F G !a", a_then_none));
  CHECK(holds("X a", Lasso{{letter({})}, {letter({"a"})}}));
  CHECK_FALSE(holds("X a", Lasso{{letter({"a"})}, {letter({})}}));
  CHECK(holds("a U b", Lasso{{letter({"a"}), letter({"a"})}, {letter({"b"})}}));
  CHECK_FALSE(holds("a U b", Lasso{{letter({"a"})}, {letter({})}}));
  // Until demands the goal actually arrives.
  CHECK_FALSE(holds("a U b", Lasso{{}, {letter({"a"})}}));
  CHECK(holds("true", never_a));
  CHECK(holds("a -> b", Lasso{{}, {letter({})}}));
  CHECK_FALSE(holds("a -> b", Lasso{{}, {letter({"a"})}}));
}

TEST_CASE("derived operators expand to the core fragment") {
  auto expanded = expand_derived(parse_ltl("(F a) & (G b) & (a -> c)"));
  // The rewritten tree uses only core constructors.
  std::vector<LtlPtr> stack{expanded};
  while (!stack.empty()) {
    auto node = stack.back();
    stack.pop_back();
    CHECK(node->op != LtlOp::Eventually);
    CHECK(node->op != LtlOp::Always);
    CHECK(node->op != LtlOp::Implies);
    if (node->left) stack.push_back(node->left);
    if (node->right) stack.push_back(node->right);
  }
}

TEST_CASE("expansion preserves satisfaction on sampled lassos") {
  std::vector<std::string> formulas{"F a",           "G a",          "a -> b",
                                    "G F a",         "F G b",        "(F a) & (G !b)",
                                    "G (a -> F b)",  "a U (b | c)",  "F (a & X b)",
                                    "G ((a U b) -> F c)"};
  auto lassos = sample_lassos({"a", "b", "c"}, 6, 300, 2024);
  for (const auto& text : formulas) {
    auto original = parse_ltl(text);
    auto expanded = expand_derived(original);
    for (const auto& w : lassos) {
      CHECK(eval_lasso(original, w) == eval_lasso(expanded, w));
    }
  }
}

TEST_CASE("unrolling the loop once does not change satisfaction") {
  std::vector<std::string> formulas{"G F a", "F G a", "a U b", "X (a | b)", "G (a -> X b)"};
  auto lassos = sample_lassos({"a", "b"}, 5, 200, 7);
  for (const auto& text : formulas) {
    auto formula = parse_ltl(text);
    for (const auto& w : lassos) {
      Lasso unrolled = w;
      unrolled.stem.insert(unrolled.stem.end(), w.loop.begin(), w.loop.end());
      CHECK(eval_lasso(formula, w) == eval_lasso(formula, unrolled));
    }
  }
}

}  // TEST_SUITE
