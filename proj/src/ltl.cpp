#include "mdpst/ltl.hpp"

#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace mdpst {

LtlPtr LtlFormula::make_true() {
  return std::make_shared<LtlFormula>(LtlFormula{LtlOp::True, "", nullptr, nullptr});
}
LtlPtr LtlFormula::make_atom(std::string name) {
  return std::make_shared<LtlFormula>(LtlFormula{LtlOp::Atom, std::move(name), nullptr, nullptr});
}
LtlPtr LtlFormula::make_unary(LtlOp op, LtlPtr sub) {
  return std::make_shared<LtlFormula>(LtlFormula{op, "", std::move(sub), nullptr});
}
LtlPtr LtlFormula::make_binary(LtlOp op, LtlPtr lhs, LtlPtr rhs) {
  return std::make_shared<LtlFormula>(LtlFormula{op, "", std::move(lhs), std::move(rhs)});
}

namespace {

struct Token {
  enum Kind { True, Ident, Not, And, Or, Implies, Next, Until, Eventually, Always, LParen, RParen, End } kind;
  std::string text;
  std::size_t pos;
};

std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (c == '(') { tokens.push_back({Token::LParen, "(", start}); ++i; continue; }
    if (c == ')') { tokens.push_back({Token::RParen, ")", start}); ++i; continue; }
    if (c == '!') { tokens.push_back({Token::Not, "!", start}); ++i; continue; }
    if (c == '&') { tokens.push_back({Token::And, "&", start}); ++i; continue; }
    if (c == '|') { tokens.push_back({Token::Or, "|", start}); ++i; continue; }
    if (c == '-') {
      if (i + 1 < text.size() && text[i + 1] == '>') { tokens.push_back({Token::Implies, "->", start}); i += 2; continue; }
      throw LtlParseError("unknown token '-'", start);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
      std::string word = text.substr(i, j - i);
      i = j;
      if (word == "true") tokens.push_back({Token::True, word, start});
      else if (word == "X") tokens.push_back({Token::Next, word, start});
      else if (word == "U") tokens.push_back({Token::Until, word, start});
      else if (word == "F") tokens.push_back({Token::Eventually, word, start});
      else if (word == "G") tokens.push_back({Token::Always, word, start});
      else tokens.push_back({Token::Ident, word, start});
      continue;
    }
    throw LtlParseError(std::string("unknown token '") + c + "'", start);
  }
  tokens.push_back({Token::End, "", text.size()});
  return tokens;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  LtlPtr parse() {
    auto f = parse_implies();
    expect(Token::End, "end of input");
    return f;
  }

 private:
  const Token& peek() const { return tokens_[index_]; }
  Token take() { return tokens_[index_++]; }
  void expect(Token::Kind kind, const std::string& what) {
    if (peek().kind != kind) throw LtlParseError("expected " + what, peek().pos);
    ++index_;
  }

  LtlPtr parse_implies() {
    auto lhs = parse_or();
    if (peek().kind == Token::Implies) {
      take();
      return LtlFormula::make_binary(LtlOp::Implies, lhs, parse_implies());
    }
    return lhs;
  }

  LtlPtr parse_or() {
    auto lhs = parse_and();
    while (peek().kind == Token::Or) {
      take();
      lhs = LtlFormula::make_binary(LtlOp::Or, lhs, parse_and());
    }
    return lhs;
  }

  LtlPtr parse_and() {
    auto lhs = parse_until();
    while (peek().kind == Token::And) {
      take();
      lhs = LtlFormula::make_binary(LtlOp::And, lhs, parse_until());
    }
    return lhs;
  }

  LtlPtr parse_until() {
    auto lhs = parse_unary();
    if (peek().kind == Token::Until) {
      take();
      return LtlFormula::make_binary(LtlOp::Until, lhs, parse_until());  // right-assoc
    }
    return lhs;
  }

  LtlPtr parse_unary() {
    switch (peek().kind) {
      case Token::Not: take(); return LtlFormula::make_unary(LtlOp::Not, parse_unary());
      case Token::Next: take(); return LtlFormula::make_unary(LtlOp::Next, parse_unary());
      case Token::Eventually: take(); return LtlFormula::make_unary(LtlOp::Eventually, parse_unary());
      case Token::Always: take(); return LtlFormula::make_unary(LtlOp::Always, parse_unary());
      default: return parse_atomic();
    }
  }

  LtlPtr parse_atomic() {
    const Token tok = take();
    switch (tok.kind) {
      case Token::True: return LtlFormula::make_true();
      case Token::Ident: return LtlFormula::make_atom(tok.text);
      case Token::LParen: {
        auto f = parse_implies();
        expect(Token::RParen, "')'");
        return f;
      }
      case Token::End: throw LtlParseError("unexpected end of input", tok.pos);
      default: throw LtlParseError("unexpected token '" + tok.text + "'", tok.pos);
    }
  }

  std::vector<Token> tokens_;
  std::size_t index_ = 0;
};

}  // namespace

LtlPtr parse_ltl(const std::string& text) { return Parser(tokenize(text)).parse(); }

LtlPtr expand_derived(const LtlPtr& f) {
  switch (f->op) {
    case LtlOp::True:
    case LtlOp::Atom:
      return f;
    case LtlOp::Not:
      return LtlFormula::make_unary(LtlOp::Not, expand_derived(f->left));
    case LtlOp::Next:
      return LtlFormula::make_unary(LtlOp::Next, expand_derived(f->left));
    case LtlOp::And:
    case LtlOp::Or:
    case LtlOp::Until:
      return LtlFormula::make_binary(f->op, expand_derived(f->left), expand_derived(f->right));
    case LtlOp::Implies:  // a -> b == !a | b
      return LtlFormula::make_binary(LtlOp::Or,
                                     LtlFormula::make_unary(LtlOp::Not, expand_derived(f->left)),
                                     expand_derived(f->right));
    case LtlOp::Eventually:  // F a == true U a
      return LtlFormula::make_binary(LtlOp::Until, LtlFormula::make_true(), expand_derived(f->left));
    case LtlOp::Always:  // G a == !(true U !a)
      return LtlFormula::make_unary(
          LtlOp::Not,
          LtlFormula::make_binary(LtlOp::Until, LtlFormula::make_true(),
                                  LtlFormula::make_unary(LtlOp::Not, expand_derived(f->left))));
  }
  throw std::logic_error("unreachable");
}

namespace {

// Evaluates one subformula at every distinct position of the lasso.
// Positions 0..|stem|-1 are the stem, |stem|..n-1 the loop; the successor of
// the last loop position wraps to |stem|.
std::vector<bool> eval_positions(const LtlPtr& f, const Lasso& lasso,
                                 std::map<const LtlFormula*, std::vector<bool>>& memo) {
  auto it = memo.find(f.get());
  if (it != memo.end()) return it->second;

  const std::size_t n = lasso.stem.size() + lasso.loop.size();
  auto letter = [&lasso](std::size_t p) -> const LabelSet& {
    return p < lasso.stem.size() ? lasso.stem[p] : lasso.loop[p - lasso.stem.size()];
  };
  auto succ = [&lasso, n](std::size_t p) { return p + 1 < n ? p + 1 : lasso.stem.size(); };

  std::vector<bool> val(n, false);
  switch (f->op) {
    case LtlOp::True:
      val.assign(n, true);
      break;
    case LtlOp::Atom:
      for (std::size_t p = 0; p < n; ++p) val[p] = letter(p).has(f->atom);
      break;
    case LtlOp::Not: {
      auto sub = eval_positions(f->left, lasso, memo);
      for (std::size_t p = 0; p < n; ++p) val[p] = !sub[p];
      break;
    }
    case LtlOp::And: {
      auto lhs = eval_positions(f->left, lasso, memo);
      auto rhs = eval_positions(f->right, lasso, memo);
      for (std::size_t p = 0; p < n; ++p) val[p] = lhs[p] && rhs[p];
      break;
    }
    case LtlOp::Or: {
      auto lhs = eval_positions(f->left, lasso, memo);
      auto rhs = eval_positions(f->right, lasso, memo);
      for (std::size_t p = 0; p < n; ++p) val[p] = lhs[p] || rhs[p];
      break;
    }
    case LtlOp::Implies: {
      auto lhs = eval_positions(f->left, lasso, memo);
      auto rhs = eval_positions(f->right, lasso, memo);
      for (std::size_t p = 0; p < n; ++p) val[p] = !lhs[p] || rhs[p];
      break;
    }
    case LtlOp::Next: {
      auto sub = eval_positions(f->left, lasso, memo);
      for (std::size_t p = 0; p < n; ++p) val[p] = sub[succ(p)];
      break;
    }
    case LtlOp::Until: {
      // Least fixpoint: val = rhs || (lhs && X val).
      auto lhs = eval_positions(f->left, lasso, memo);
      auto rhs = eval_positions(f->right, lasso, memo);
      val = rhs;
      bool changed = true;
      while (changed) {
        changed = false;
        for (std::size_t p = n; p-- > 0;) {
          bool next = val[p] || (lhs[p] && val[succ(p)]);
          if (next != val[p]) {
            val[p] = next;
            changed = true;
          }
        }
      }
      break;
    }
    case LtlOp::Eventually: {
      auto sub = eval_positions(f->left, lasso, memo);
      val = sub;
      bool changed = true;
      while (changed) {
        changed = false;
        for (std::size_t p = n; p-- > 0;) {
          bool next = val[p] || val[succ(p)];
          if (next != val[p]) {
            val[p] = next;
            changed = true;
          }
        }
      }
      break;
    }
    case LtlOp::Always: {
      // Greatest fixpoint: val = sub && X val.
      auto sub = eval_positions(f->left, lasso, memo);
      val = sub;
      bool changed = true;
      while (changed) {
        changed = false;
        for (std::size_t p = n; p-- > 0;) {
          bool next = val[p] && val[succ(p)];
          if (next != val[p]) {
            val[p] = next;
            changed = true;
          }
        }
      }
      break;
    }
  }
  memo.emplace(f.get(), val);
  return val;
}

int precedence(LtlOp op) {
  switch (op) {
    case LtlOp::Implies: return 0;
    case LtlOp::Or: return 1;
    case LtlOp::And: return 2;
    case LtlOp::Until: return 3;
    default: return 4;
  }
}

void print(const LtlPtr& f, std::ostringstream& out, int parent_prec) {
  int prec = precedence(f->op);
  bool paren = prec < parent_prec;
  if (paren) out << "(";
  switch (f->op) {
    case LtlOp::True: out << "true"; break;
    case LtlOp::Atom: out << f->atom; break;
    case LtlOp::Not: out << "!"; print(f->left, out, 4); break;
    case LtlOp::Next: out << "X "; print(f->left, out, 4); break;
    case LtlOp::Eventually: out << "F "; print(f->left, out, 4); break;
    case LtlOp::Always: out << "G "; print(f->left, out, 4); break;
    case LtlOp::And: print(f->left, out, 2); out << " & "; print(f->right, out, 3); break;
    case LtlOp::Or: print(f->left, out, 1); out << " | "; print(f->right, out, 2); break;
    case LtlOp::Implies: print(f->left, out, 1); out << " -> "; print(f->right, out, 0); break;
    case LtlOp::Until: print(f->left, out, 4); out << " U "; print(f->right, out, 3); break;
  }
  if (paren) out << ")";
}

void collect_atoms(const LtlPtr& f, std::set<std::string>& atoms) {
  if (!f) return;
  if (f->op == LtlOp::Atom) atoms.insert(f->atom);
  collect_atoms(f->left, atoms);
  collect_atoms(f->right, atoms);
}

}  // namespace

bool eval_lasso(const LtlPtr& formula, const Lasso& lasso) {
  if (lasso.loop.empty()) throw std::invalid_argument("lasso loop must be nonempty");
  std::map<const LtlFormula*, std::vector<bool>> memo;
  return eval_positions(formula, lasso, memo)[0];
}

std::string ltl_to_string(const LtlPtr& formula) {
  std::ostringstream out;
  print(formula, out, 0);
  return out.str();
}

std::vector<std::string> ltl_atoms(const LtlPtr& formula) {
  std::set<std::string> atoms;
  collect_atoms(formula, atoms);
  return {atoms.begin(), atoms.end()};
}

}  // namespace mdpst
