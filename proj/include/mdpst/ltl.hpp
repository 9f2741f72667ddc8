#pragma once

#include <memory>
#include <string>
#include <vector>

#include "mdpst/model.hpp"

namespace mdpst {

enum class LtlOp { True, Atom, Not, And, Or, Next, Until, Implies, Eventually, Always };

struct LtlFormula;
using LtlPtr = std::shared_ptr<const LtlFormula>;

struct LtlFormula {
  LtlOp op;
  std::string atom;   // Atom only
  LtlPtr left;        // unary operand / left operand
  LtlPtr right;       // binary right operand

  static LtlPtr make_true();
  static LtlPtr make_atom(std::string name);
  static LtlPtr make_unary(LtlOp op, LtlPtr sub);
  static LtlPtr make_binary(LtlOp op, LtlPtr lhs, LtlPtr rhs);
};

// Finite presentation stem . loop^omega of an ultimately periodic trace.
struct Lasso {
  std::vector<LabelSet> stem;
  std::vector<LabelSet> loop;  // nonempty
};

// Surface syntax: true, identifiers, !, &, |, ->, X, U, F, G.
// Precedence: unary > U (right-assoc) > & > | > ->. Throws LtlParseError.
struct LtlParseError : std::runtime_error {
  std::size_t position;
  LtlParseError(const std::string& msg, std::size_t pos)
      : std::runtime_error(msg + " at position " + std::to_string(pos)), position(pos) {}
};

LtlPtr parse_ltl(const std::string& text);

// Rewrites Implies/Eventually/Always into the core constructors.
LtlPtr expand_derived(const LtlPtr& formula);

// Exact satisfaction of stem . loop^omega, least fixpoint for Until.
bool eval_lasso(const LtlPtr& formula, const Lasso& lasso);

// Round-trip stable pretty printer.
std::string ltl_to_string(const LtlPtr& formula);

std::vector<std::string> ltl_atoms(const LtlPtr& formula);

}  // namespace mdpst
