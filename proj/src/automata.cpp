#include "mdpst/automata.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace mdpst {

using nlohmann::json;

namespace {

bool eval_prop(const LtlPtr& f, const LabelSet& letter) {
  switch (f->op) {
    case LtlOp::True: return true;
    case LtlOp::Atom: return letter.has(f->atom);
    case LtlOp::Not: return !eval_prop(f->left, letter);
    case LtlOp::And: return eval_prop(f->left, letter) && eval_prop(f->right, letter);
    case LtlOp::Or: return eval_prop(f->left, letter) || eval_prop(f->right, letter);
    case LtlOp::Implies: return !eval_prop(f->left, letter) || eval_prop(f->right, letter);
    default:
      throw std::invalid_argument("guard contains temporal operator");
  }
}

void check_propositional(const LtlPtr& f) {
  if (!f) return;
  switch (f->op) {
    case LtlOp::Next:
    case LtlOp::Until:
    case LtlOp::Eventually:
    case LtlOp::Always:
      throw std::invalid_argument("guard contains temporal operator");
    default:
      break;
  }
  check_propositional(f->left);
  check_propositional(f->right);
}

LabelSet assignment_letter(const std::vector<std::string>& ap, std::uint64_t bits) {
  LabelSet letter;
  for (std::size_t i = 0; i < ap.size(); ++i) {
    if (bits & (1ull << i)) letter.atoms.insert(ap[i]);
  }
  return letter;
}

// Guards g1, g2 disjoint as Boolean functions over 2^ap.
bool guards_disjoint(const Guard& g1, const Guard& g2, const std::vector<std::string>& ap) {
  if (ap.size() > 20) throw std::runtime_error("too many atomic propositions for guard analysis");
  for (std::uint64_t bits = 0; bits < (1ull << ap.size()); ++bits) {
    auto letter = assignment_letter(ap, bits);
    if (g1.eval(letter) && g2.eval(letter)) return false;
  }
  return true;
}

}  // namespace

bool Guard::eval(const LabelSet& letter) const { return eval_prop(expr, letter); }

Guard parse_guard(const std::string& text) {
  auto expr = parse_ltl(text);
  check_propositional(expr);
  return Guard{expr};
}

bool Ldba::has_edge_marks() const {
  return std::any_of(edges.begin(), edges.end(), [](const AutEdge& e) { return e.accepting; });
}

std::vector<const AutEdge*> Ldba::edges_from(AutStateIndex q) const {
  std::vector<const AutEdge*> result;
  for (const auto& e : edges) {
    if (e.from == q) result.push_back(&e);
  }
  return result;
}

std::vector<const AutEdge*> Dra::edges_from(AutStateIndex q) const {
  std::vector<const AutEdge*> result;
  for (const auto& e : edges) {
    if (e.from == q) result.push_back(&e);
  }
  return result;
}

ValidationReport validate_ldba(const Ldba& a) {
  ValidationReport report;
  auto add = [&report](std::string msg) { report.issues.push_back({std::move(msg), {}, {}}); };

  const auto n = a.num_states();
  if (a.initial >= n) {
    add("initial state out of range");
    return report;
  }
  if (a.components[a.initial] != AutComponent::Initial)
    add("initial state not in Initial component");
  for (auto q : a.accepting) {
    if (q >= n || a.components[q] != AutComponent::Accepting)
      add("accepting state " + std::to_string(q) + " not in Accepting component");
  }
  for (const auto& e : a.edges) {
    if (e.from >= n || e.to >= n) {
      add("edge endpoint out of range");
      continue;
    }
    if (a.components[e.from] != a.components[e.to])
      add("edge " + std::to_string(e.from) + "->" + std::to_string(e.to) + " crosses components");
    if (e.accepting && a.components[e.from] != AutComponent::Accepting)
      add("accepting mark on edge outside the Accepting component");
  }
  for (const auto& [from, targets] : a.eps_jumps) {
    if (from >= n || a.components[from] != AutComponent::Initial)
      add("eps-jump source " + std::to_string(from) + " not in Initial component");
    for (auto to : targets) {
      if (to >= n || a.components[to] != AutComponent::Accepting)
        add("eps-jump target " + std::to_string(to) + " not in Accepting component");
    }
  }
  // Determinism: pairwise disjoint guards per source state.
  for (AutStateIndex q = 0; q < n; ++q) {
    auto out = a.edges_from(q);
    for (std::size_t i = 0; i < out.size(); ++i) {
      for (std::size_t j = i + 1; j < out.size(); ++j) {
        if (!guards_disjoint(out[i]->guard, out[j]->guard, a.ap)) {
          add("nondeterministic edges at state " + std::to_string(q));
          j = out.size();
          i = out.size();
        }
      }
    }
  }

  bool any_marks = !a.accepting.empty() || a.has_edge_marks();
  if (!any_marks) add("warning: accepting set is empty");

  // Reachability of marks from eps-jump targets within the Accepting component.
  std::set<AutStateIndex> reach;
  std::queue<AutStateIndex> queue;
  for (const auto& [from, targets] : a.eps_jumps) {
    (void)from;
    for (auto t : targets) {
      if (reach.insert(t).second) queue.push(t);
    }
  }
  while (!queue.empty()) {
    auto q = queue.front();
    queue.pop();
    for (const auto* e : a.edges_from(q)) {
      if (reach.insert(e->to).second) queue.push(e->to);
    }
  }
  bool mark_reachable = false;
  for (auto q : reach) {
    if (a.accepting.count(q)) mark_reachable = true;
  }
  for (const auto& e : a.edges) {
    if (e.accepting && reach.count(e.from)) mark_reachable = true;
  }
  if (any_marks && !mark_reachable) add("warning: no accepting state reachable via any eps-jump");
  return report;
}

ValidationReport validate_dra(const Dra& d) {
  ValidationReport report;
  auto add = [&report](std::string msg) { report.issues.push_back({std::move(msg), {}, {}}); };
  if (d.initial >= d.states) add("initial state out of range");
  if (d.pairs.empty()) add("Rabin pair list is empty");
  for (const auto& e : d.edges) {
    if (e.from >= d.states || e.to >= d.states) add("edge endpoint out of range");
  }
  if (d.ap.size() > 20) {
    add("too many atomic propositions for totality check");
    return report;
  }
  for (AutStateIndex q = 0; q < d.states; ++q) {
    auto out = d.edges_from(q);
    for (std::uint64_t bits = 0; bits < (1ull << d.ap.size()); ++bits) {
      auto letter = assignment_letter(d.ap, bits);
      int matches = 0;
      for (const auto* e : out) {
        if (e->guard.eval(letter)) ++matches;
      }
      if (matches != 1) {
        add("state " + std::to_string(q) + ": " + std::to_string(matches) +
            " edges match a letter (must be exactly 1)");
        break;
      }
    }
  }
  return report;
}

const AutEdge* ldba_step_edge(const Ldba& a, AutStateIndex q, const LabelSet& letter) {
  for (const auto& e : a.edges) {
    if (e.from == q && e.guard.eval(letter)) return &e;
  }
  return nullptr;
}

std::optional<AutStateIndex> ldba_step(const Ldba& a, AutStateIndex q, const LabelSet& letter) {
  const auto* e = ldba_step_edge(a, q, letter);
  if (!e) return std::nullopt;
  return e->to;
}

AutStateIndex dra_step(const Dra& d, AutStateIndex q, const LabelSet& letter) {
  for (const auto& e : d.edges) {
    if (e.from == q && e.guard.eval(letter)) return e.to;
  }
  throw std::logic_error("DRA transition function not total");
}

namespace {

const LabelSet& lasso_letter(const Lasso& w, std::size_t pos) {
  if (pos < w.stem.size()) return w.stem[pos];
  return w.loop[(pos - w.stem.size()) % w.loop.size()];
}

// Runs the accepting component from (start state, start position); returns
// true when the eventual cycle visits a state-mark or fires an edge-mark.
bool accepting_run_from(const Ldba& a, AutStateIndex start, std::size_t start_pos, const Lasso& w) {
  std::map<std::pair<std::size_t, AutStateIndex>, std::size_t> seen;  // (loop phase, q) -> step
  std::vector<std::pair<AutStateIndex, const AutEdge*>> trail;        // state before step, edge taken
  AutStateIndex q = start;
  std::size_t pos = start_pos;
  while (true) {
    if (pos >= w.stem.size()) {
      std::size_t phase = (pos - w.stem.size()) % w.loop.size();
      auto key = std::make_pair(phase, q);
      auto it = seen.find(key);
      if (it != seen.end()) {
        for (std::size_t i = it->second; i < trail.size(); ++i) {
          auto [state, edge] = trail[i];
          if (a.accepting.count(state)) return true;
          if (edge->accepting) return true;
        }
        return false;
      }
      seen.emplace(key, trail.size());
    }
    const auto* e = ldba_step_edge(a, q, lasso_letter(w, pos));
    if (!e) return false;  // missing edge = rejection
    trail.push_back({q, e});
    q = e->to;
    ++pos;
  }
}

}  // namespace

bool ldba_accepts_lasso(const Ldba& a, const Lasso& w) {
  if (w.loop.empty()) throw std::invalid_argument("lasso loop must be nonempty");
  // Walk the Initial component, trying every eps-jump placement. Positions
  // are explored until the (loop phase, state) configuration repeats.
  std::set<std::pair<std::size_t, AutStateIndex>> visited;
  AutStateIndex q = a.initial;
  std::size_t pos = 0;
  while (true) {
    auto jumps = a.eps_jumps.find(q);
    if (jumps != a.eps_jumps.end()) {
      for (auto target : jumps->second) {
        if (accepting_run_from(a, target, pos, w)) return true;
      }
    }
    if (pos >= w.stem.size()) {
      std::size_t phase = (pos - w.stem.size()) % w.loop.size();
      if (!visited.insert({phase, q}).second) return false;
    }
    auto next = ldba_step(a, q, lasso_letter(w, pos));
    if (!next) return false;
    q = *next;
    ++pos;
  }
}

bool dra_accepts_lasso(const Dra& d, const Lasso& w) {
  if (w.loop.empty()) throw std::invalid_argument("lasso loop must be nonempty");
  std::map<std::pair<std::size_t, AutStateIndex>, std::size_t> seen;
  std::vector<AutStateIndex> trail;
  AutStateIndex q = d.initial;
  std::size_t pos = 0;
  while (true) {
    if (pos >= w.stem.size()) {
      std::size_t phase = (pos - w.stem.size()) % w.loop.size();
      auto key = std::make_pair(phase, q);
      auto it = seen.find(key);
      if (it != seen.end()) {
        std::set<AutStateIndex> cycle(trail.begin() + static_cast<long>(it->second), trail.end());
        for (const auto& pair : d.pairs) {
          bool hits_fin = std::any_of(cycle.begin(), cycle.end(),
                                      [&pair](AutStateIndex s) { return pair.fin.count(s) > 0; });
          bool hits_inf = std::any_of(cycle.begin(), cycle.end(),
                                      [&pair](AutStateIndex s) { return pair.inf.count(s) > 0; });
          if (!hits_fin && hits_inf) return true;
        }
        return false;
      }
      seen.emplace(key, trail.size());
    }
    trail.push_back(q);
    q = dra_step(d, q, lasso_letter(w, pos));
    ++pos;
  }
}

// ---------------------------------------------------------------------------
// Fixtures

namespace {

LtlPtr atom_expr(const std::string& name) { return LtlFormula::make_atom(name); }
LtlPtr not_expr(LtlPtr e) { return LtlFormula::make_unary(LtlOp::Not, std::move(e)); }
LtlPtr and_expr(LtlPtr l, LtlPtr r) {
  return LtlFormula::make_binary(LtlOp::And, std::move(l), std::move(r));
}
LtlPtr or_group(const std::vector<std::string>& atoms) {
  LtlPtr e = atom_expr(atoms.front());
  for (std::size_t i = 1; i < atoms.size(); ++i)
    e = LtlFormula::make_binary(LtlOp::Or, e, atom_expr(atoms[i]));
  return e;
}

}  // namespace

Ldba fixture_ldba_gf(const std::string& atom) { return fixture_ldba_gf_conj({atom}); }

Ldba fixture_ldba_gf_conj(const std::vector<std::string>& atoms) {
  if (atoms.empty()) throw std::invalid_argument("gf_conj requires at least one atom");
  Ldba a;
  const auto k = atoms.size();
  // State 0: Initial component. States 1..k: round-robin trackers, state i
  // awaiting atoms[i-1]; the edge completing the cycle carries the mark.
  a.components.assign(k + 1, AutComponent::Accepting);
  a.components[0] = AutComponent::Initial;
  a.initial = 0;
  std::set<std::string> sorted(atoms.begin(), atoms.end());
  a.ap.assign(sorted.begin(), sorted.end());
  a.edges.push_back({0, Guard{LtlFormula::make_true()}, 0, false});
  a.eps_jumps[0] = {1};
  for (std::size_t i = 0; i < k; ++i) {
    auto from = static_cast<AutStateIndex>(i + 1);
    auto next = static_cast<AutStateIndex>(i + 1 == k ? 1 : i + 2);
    a.edges.push_back({from, Guard{atom_expr(atoms[i])}, next, i + 1 == k});
    a.edges.push_back({from, Guard{not_expr(atom_expr(atoms[i]))}, from, false});
  }
  return a;
}

Ldba fixture_ldba_persist_avoid(const std::vector<std::vector<std::string>>& goal_groups,
                                const std::string& avoid_atom) {
  if (goal_groups.empty()) throw std::invalid_argument("persist_avoid requires goal groups");
  for (const auto& g : goal_groups) {
    if (g.empty()) throw std::invalid_argument("persist_avoid goal group is empty");
  }
  Ldba a;
  const auto k = goal_groups.size();
  a.components.assign(k + 1, AutComponent::Accepting);
  a.components[0] = AutComponent::Initial;
  a.initial = 0;
  std::set<std::string> ap{avoid_atom};
  for (const auto& g : goal_groups) ap.insert(g.begin(), g.end());
  a.ap.assign(ap.begin(), ap.end());

  auto safe = [&avoid_atom] { return not_expr(atom_expr(avoid_atom)); };
  // Letters containing the avoid atom have no edge anywhere.
  a.edges.push_back({0, Guard{safe()}, 0, false});
  a.eps_jumps[0] = {1};
  for (std::size_t i = 0; i < k; ++i) {
    auto from = static_cast<AutStateIndex>(i + 1);
    auto next = static_cast<AutStateIndex>(i + 1 == k ? 1 : i + 2);
    auto group = or_group(goal_groups[i]);
    a.edges.push_back({from, Guard{and_expr(group, safe())}, next, i + 1 == k});
    a.edges.push_back({from, Guard{and_expr(not_expr(group), safe())}, from, false});
  }
  return a;
}

Dra fixture_dra_persist_avoid(const std::vector<std::vector<std::string>>& goal_groups,
                              const std::string& avoid_atom) {
  if (goal_groups.empty()) throw std::invalid_argument("persist_avoid requires goal groups");
  for (const auto& g : goal_groups) {
    if (g.empty()) throw std::invalid_argument("persist_avoid goal group is empty");
  }
  Dra d;
  const auto k = goal_groups.size();
  // Alive states 0..k: 0..k-1 await group i, k is the completion flag
  // (behaves like state 0). Dead copies k+1 .. 2k+1 absorb after the avoid
  // atom; Fin = dead states, Inf = {completion state}.
  d.states = 2 * (k + 1);
  d.initial = 0;
  std::set<std::string> ap{avoid_atom};
  for (const auto& g : goal_groups) ap.insert(g.begin(), g.end());
  d.ap.assign(ap.begin(), ap.end());

  auto safe = [&avoid_atom] { return not_expr(atom_expr(avoid_atom)); };
  auto dead_of = [k](AutStateIndex q) { return static_cast<AutStateIndex>(q + k + 1); };
  const auto completion = static_cast<AutStateIndex>(k);

  for (AutStateIndex q = 0; q <= completion; ++q) {
    std::size_t group_index = q == completion ? 0 : q;
    auto group = or_group(goal_groups[group_index]);
    AutStateIndex next = group_index + 1 == k ? completion : static_cast<AutStateIndex>(group_index + 1);
    AutStateIndex stay = q == completion ? 0 : q;  // completion flag clears on any letter
    d.edges.push_back({q, Guard{and_expr(group, safe())}, next, false});
    d.edges.push_back({q, Guard{and_expr(not_expr(group), safe())}, stay, false});
    d.edges.push_back({q, Guard{atom_expr(avoid_atom)}, dead_of(q), false});
    d.edges.push_back({dead_of(q), Guard{LtlFormula::make_true()}, dead_of(q), false});
  }
  RabinPair pair;
  for (AutStateIndex q = 0; q <= completion; ++q) pair.fin.insert(dead_of(q));
  pair.inf.insert(completion);
  d.pairs.push_back(pair);
  return d;
}

// ---------------------------------------------------------------------------
// HOA v1 subset parser

namespace {

struct HoaError : std::runtime_error {
  HoaError(const std::string& msg, std::size_t line)
      : std::runtime_error("HOA line " + std::to_string(line) + ": " + msg) {}
};

// Label expression over AP indices: !, &, |, t, parentheses.
class LabelParser {
 public:
  LabelParser(const std::string& text, const std::vector<std::string>& ap, std::size_t line)
      : text_(text), ap_(ap), line_(line) {}

  LtlPtr parse() {
    auto e = parse_or();
    skip_ws();
    if (pos_ != text_.size()) throw HoaError("malformed label expression '" + text_ + "'", line_);
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  LtlPtr parse_or() {
    auto lhs = parse_and();
    skip_ws();
    while (pos_ < text_.size() && text_[pos_] == '|') {
      ++pos_;
      lhs = LtlFormula::make_binary(LtlOp::Or, lhs, parse_and());
      skip_ws();
    }
    return lhs;
  }
  LtlPtr parse_and() {
    auto lhs = parse_unary();
    skip_ws();
    while (pos_ < text_.size() && text_[pos_] == '&') {
      ++pos_;
      lhs = LtlFormula::make_binary(LtlOp::And, lhs, parse_unary());
      skip_ws();
    }
    return lhs;
  }
  LtlPtr parse_unary() {
    skip_ws();
    if (pos_ >= text_.size()) throw HoaError("malformed label expression '" + text_ + "'", line_);
    char c = text_[pos_];
    if (c == '!') {
      ++pos_;
      return LtlFormula::make_unary(LtlOp::Not, parse_unary());
    }
    if (c == '(') {
      ++pos_;
      auto e = parse_or();
      skip_ws();
      if (pos_ >= text_.size() || text_[pos_] != ')')
        throw HoaError("missing ')' in label expression", line_);
      ++pos_;
      return e;
    }
    if (c == 't') {
      ++pos_;
      return LtlFormula::make_true();
    }
    if (c == 'f') {
      ++pos_;
      return LtlFormula::make_unary(LtlOp::Not, LtlFormula::make_true());
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = pos_;
      while (j < text_.size() && std::isdigit(static_cast<unsigned char>(text_[j]))) ++j;
      auto index = std::stoul(text_.substr(pos_, j - pos_));
      pos_ = j;
      if (index >= ap_.size()) throw HoaError("AP index " + std::to_string(index) + " out of range", line_);
      return LtlFormula::make_atom(ap_[index]);
    }
    throw HoaError("malformed label expression '" + text_ + "'", line_);
  }

  const std::string& text_;
  const std::vector<std::string>& ap_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

struct RawEdge {
  AutStateIndex from;
  Guard guard;
  AutStateIndex to;
  std::set<int> marks;
};

struct RawHoa {
  std::size_t states = 0;
  AutStateIndex start = 0;
  bool have_start = false;
  std::vector<std::string> ap;
  enum { Buchi, Rabin } kind = Buchi;
  std::size_t rabin_pairs = 0;
  std::vector<RawEdge> edges;
  std::map<AutStateIndex, std::set<int>> state_marks;
};

std::set<int> parse_marks(std::string text, std::size_t line) {
  std::set<int> marks;
  std::istringstream in(text);
  int m;
  while (in >> m) marks.insert(m);
  if (!in.eof() && in.fail()) throw HoaError("malformed acceptance marks {" + text + "}", line);
  return marks;
}

RawHoa parse_hoa_raw(const std::string& text) {
  RawHoa hoa;
  std::istringstream stream(text);
  std::string line;
  std::size_t lineno = 0;
  bool in_body = false;
  bool saw_header = false;
  std::optional<AutStateIndex> current_state;

  while (std::getline(stream, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto last = line.find_last_not_of(" \t\r");
    std::string trimmed = line.substr(first, last - first + 1);
    if (trimmed == "--END--") break;
    if (trimmed == "--BODY--") {
      in_body = true;
      continue;
    }

    if (!in_body) {
      auto colon = trimmed.find(':');
      if (colon == std::string::npos) throw HoaError("expected 'key: value' header", lineno);
      std::string key = trimmed.substr(0, colon);
      std::string value = trimmed.substr(colon + 1);
      auto vfirst = value.find_first_not_of(" \t");
      value = vfirst == std::string::npos ? "" : value.substr(vfirst);
      if (key == "HOA") {
        if (value != "v1") throw HoaError("unsupported HOA version '" + value + "'", lineno);
        saw_header = true;
      } else if (key == "States") {
        hoa.states = std::stoul(value);
      } else if (key == "Start") {
        if (hoa.have_start) throw HoaError("multiple Start states unsupported", lineno);
        if (value.find_first_of(" &") != std::string::npos)
          throw HoaError("multiple Start states unsupported", lineno);
        hoa.start = static_cast<AutStateIndex>(std::stoul(value));
        hoa.have_start = true;
      } else if (key == "AP") {
        std::istringstream in(value);
        std::size_t count;
        in >> count;
        std::string rest;
        std::getline(in, rest);
        std::size_t pos = 0;
        for (std::size_t i = 0; i < count; ++i) {
          auto open = rest.find('"', pos);
          auto close = rest.find('"', open + 1);
          if (open == std::string::npos || close == std::string::npos)
            throw HoaError("malformed AP list", lineno);
          hoa.ap.push_back(rest.substr(open + 1, close - open - 1));
          pos = close + 1;
        }
      } else if (key == "acc-name") {
        std::istringstream in(value);
        std::string name;
        in >> name;
        if (name == "Buchi") {
          hoa.kind = RawHoa::Buchi;
        } else if (name == "Rabin") {
          hoa.kind = RawHoa::Rabin;
          in >> hoa.rabin_pairs;
          if (hoa.rabin_pairs == 0) throw HoaError("Rabin automaton needs >= 1 pair", lineno);
        } else {
          throw HoaError("unsupported acc-name '" + name + "'", lineno);
        }
      } else if (key == "Acceptance" || key == "name" || key == "tool" || key == "properties") {
        // Acceptance condition follows from acc-name in this subset.
      } else {
        throw HoaError("unsupported header item '" + key + ":'", lineno);
      }
      continue;
    }

    if (!saw_header) throw HoaError("missing 'HOA: v1' header", lineno);
    if (trimmed.rfind("State:", 0) == 0) {
      std::string rest = trimmed.substr(6);
      std::set<int> marks;
      auto brace = rest.find('{');
      if (brace != std::string::npos) {
        auto close = rest.find('}', brace);
        if (close == std::string::npos) throw HoaError("missing '}' in state marks", lineno);
        marks = parse_marks(rest.substr(brace + 1, close - brace - 1), lineno);
        rest = rest.substr(0, brace);
      }
      std::istringstream in(rest);
      std::size_t id;
      if (!(in >> id)) throw HoaError("malformed State: line", lineno);
      current_state = static_cast<AutStateIndex>(id);
      if (!marks.empty()) hoa.state_marks[*current_state] = marks;
      continue;
    }
    // Edge: [label] target {marks}
    if (trimmed.empty() || trimmed[0] != '[')
      throw HoaError("expected '[label] target' edge line", lineno);
    if (!current_state) throw HoaError("edge before any State: header", lineno);
    auto close = trimmed.find(']');
    if (close == std::string::npos) throw HoaError("missing ']' in edge label", lineno);
    std::string label = trimmed.substr(1, close - 1);
    std::string rest = trimmed.substr(close + 1);
    std::set<int> marks;
    auto brace = rest.find('{');
    if (brace != std::string::npos) {
      auto mclose = rest.find('}', brace);
      if (mclose == std::string::npos) throw HoaError("missing '}' in edge marks", lineno);
      marks = parse_marks(rest.substr(brace + 1, mclose - brace - 1), lineno);
      rest = rest.substr(0, brace);
    }
    std::istringstream in(rest);
    std::size_t target;
    if (!(in >> target)) throw HoaError("malformed edge target", lineno);
    Guard guard{LabelParser(label, hoa.ap, lineno).parse()};
    hoa.edges.push_back({*current_state, guard, static_cast<AutStateIndex>(target), marks});
  }
  if (!saw_header) throw HoaError("missing 'HOA: v1' header", 1);
  if (!hoa.have_start) throw HoaError("missing Start:", lineno);
  if (hoa.states == 0) throw HoaError("missing or zero States:", lineno);
  return hoa;
}

void check_hoa_determinism(const RawHoa& hoa) {
  for (AutStateIndex q = 0; q < hoa.states; ++q) {
    std::vector<const RawEdge*> out;
    for (const auto& e : hoa.edges) {
      if (e.from == q) out.push_back(&e);
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
      for (std::size_t j = i + 1; j < out.size(); ++j) {
        if (!guards_disjoint(out[i]->guard, out[j]->guard, hoa.ap))
          throw std::runtime_error("HOA: nondeterministic edges at state " + std::to_string(q));
      }
    }
  }
}

Ldba ldba_from_hoa(const RawHoa& hoa) {
  check_hoa_determinism(hoa);
  // Accepting component: successor closure of every marked state and every
  // endpoint of a marked edge.
  std::set<AutStateIndex> acc_component;
  std::queue<AutStateIndex> queue;
  auto seed = [&](AutStateIndex q) {
    if (acc_component.insert(q).second) queue.push(q);
  };
  for (const auto& [q, marks] : hoa.state_marks) {
    if (!marks.empty()) seed(q);
  }
  for (const auto& e : hoa.edges) {
    if (!e.marks.empty()) {
      seed(e.from);
      seed(e.to);
    }
  }
  while (!queue.empty()) {
    auto q = queue.front();
    queue.pop();
    for (const auto& e : hoa.edges) {
      if (e.from == q) seed(e.to);
    }
  }
  for (const auto& e : hoa.edges) {
    if (!acc_component.count(e.from) && acc_component.count(e.to))
      throw std::runtime_error(
          "HOA: letter edge crosses into the accepting component; the jump must be an "
          "eps-transition, cannot load as LDBA");
  }
  if (!acc_component.count(hoa.start))
    throw std::runtime_error(
        "HOA: start state lies outside the accepting-component closure and HOA has no "
        "eps-transitions, cannot load as LDBA");

  // All (reachable) states sit in the accepting component; synthesize a fresh
  // non-accepting initial state with an eps-jump to the original start.
  std::map<AutStateIndex, AutStateIndex> remap;
  for (auto q : acc_component) {
    auto index = static_cast<AutStateIndex>(remap.size() + 1);
    remap[q] = index;
  }
  Ldba a;
  a.components.assign(remap.size() + 1, AutComponent::Accepting);
  a.components[0] = AutComponent::Initial;
  a.initial = 0;
  a.ap = hoa.ap;
  a.edges.push_back({0, Guard{LtlFormula::make_true()}, 0, false});
  a.eps_jumps[0] = {remap.at(hoa.start)};
  for (const auto& e : hoa.edges) {
    if (!acc_component.count(e.from)) continue;
    a.edges.push_back({remap.at(e.from), e.guard, remap.at(e.to), !e.marks.empty()});
  }
  for (const auto& [q, marks] : hoa.state_marks) {
    if (!marks.empty() && remap.count(q)) a.accepting.insert(remap.at(q));
  }
  auto report = validate_ldba(a);
  for (const auto& issue : report.issues) {
    if (issue.message.rfind("warning:", 0) != 0)
      throw std::runtime_error("HOA: loaded automaton violates LDBA invariants: " + issue.message);
  }
  return a;
}

Dra dra_from_hoa(const RawHoa& hoa) {
  check_hoa_determinism(hoa);
  Dra d;
  d.states = hoa.states;
  d.initial = hoa.start;
  d.ap = hoa.ap;
  for (const auto& e : hoa.edges) {
    if (!e.marks.empty())
      throw std::runtime_error("HOA: edge-level marks unsupported for Rabin automata");
    d.edges.push_back({e.from, e.guard, e.to, false});
  }
  d.pairs.resize(hoa.rabin_pairs);
  for (const auto& [q, marks] : hoa.state_marks) {
    for (int m : marks) {
      auto pair = static_cast<std::size_t>(m / 2);
      if (pair >= d.pairs.size()) throw std::runtime_error("HOA: acceptance mark out of range");
      if (m % 2 == 0)
        d.pairs[pair].fin.insert(q);
      else
        d.pairs[pair].inf.insert(q);
    }
  }
  auto report = validate_dra(d);
  if (!report.ok())
    throw std::runtime_error("HOA: loaded automaton violates DRA invariants:\n" + report.to_string());
  return d;
}

}  // namespace

Automaton parse_hoa(const std::string& text) {
  auto raw = parse_hoa_raw(text);
  if (raw.kind == RawHoa::Rabin) return dra_from_hoa(raw);
  return ldba_from_hoa(raw);
}

// ---------------------------------------------------------------------------
// Native JSON format

namespace {

Automaton automaton_from_json(const json& doc) {
  auto kind = doc.at("kind").get<std::string>();
  if (kind == "ldba") {
    Ldba a;
    a.ap = doc.at("ap").get<std::vector<std::string>>();
    const auto& states = doc.at("states");
    a.components.resize(states.size());
    for (const auto& st : states) {
      auto id = st.at("id").get<AutStateIndex>();
      if (id >= states.size()) throw std::runtime_error("automaton JSON: state id out of range");
      auto comp = st.at("component").get<std::string>();
      if (comp == "init") a.components[id] = AutComponent::Initial;
      else if (comp == "acc") a.components[id] = AutComponent::Accepting;
      else throw std::runtime_error("automaton JSON: component must be 'init' or 'acc'");
      if (st.value("accepting", false)) a.accepting.insert(id);
    }
    a.initial = doc.at("initial").get<AutStateIndex>();
    for (const auto& ed : doc.at("edges")) {
      AutEdge e;
      e.from = ed.at("from").get<AutStateIndex>();
      e.to = ed.at("to").get<AutStateIndex>();
      e.guard = parse_guard(ed.at("guard").get<std::string>());
      e.accepting = ed.value("accepting", false);
      a.edges.push_back(std::move(e));
    }
    if (doc.contains("eps")) {
      for (const auto& jp : doc.at("eps"))
        a.eps_jumps[jp.at("from").get<AutStateIndex>()].insert(jp.at("to").get<AutStateIndex>());
    }
    auto report = validate_ldba(a);
    for (const auto& issue : report.issues) {
      if (issue.message.rfind("warning:", 0) != 0)
        throw std::runtime_error("automaton JSON: invalid LDBA: " + issue.message);
    }
    return a;
  }
  if (kind == "dra") {
    Dra d;
    d.ap = doc.at("ap").get<std::vector<std::string>>();
    d.states = doc.at("states").size();
    d.initial = doc.at("initial").get<AutStateIndex>();
    for (const auto& ed : doc.at("edges")) {
      AutEdge e;
      e.from = ed.at("from").get<AutStateIndex>();
      e.to = ed.at("to").get<AutStateIndex>();
      e.guard = parse_guard(ed.at("guard").get<std::string>());
      d.edges.push_back(std::move(e));
    }
    for (const auto& pr : doc.at("pairs")) {
      RabinPair pair;
      for (const auto& q : pr.at("fin")) pair.fin.insert(q.get<AutStateIndex>());
      for (const auto& q : pr.at("inf")) pair.inf.insert(q.get<AutStateIndex>());
      d.pairs.push_back(std::move(pair));
    }
    auto report = validate_dra(d);
    if (!report.ok())
      throw std::runtime_error("automaton JSON: invalid DRA:\n" + report.to_string());
    return d;
  }
  throw std::runtime_error("automaton JSON: kind must be 'ldba' or 'dra'");
}

}  // namespace

Automaton load_automaton_json(const std::string& text) {
  return automaton_from_json(json::parse(text));
}

Automaton load_automaton_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open automaton file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  std::string text = buffer.str();
  auto nonspace = text.find_first_not_of(" \t\r\n");
  if (nonspace != std::string::npos && text.compare(nonspace, 4, "HOA:") == 0) return parse_hoa(text);
  try {
    return automaton_from_json(json::parse(text));
  } catch (const json::parse_error& err) {
    throw std::runtime_error(path + ": " + err.what());
  }
}

std::string automaton_to_json(const Automaton& aut) {
  json doc;
  if (std::holds_alternative<Ldba>(aut)) {
    const auto& a = std::get<Ldba>(aut);
    doc["kind"] = "ldba";
    doc["ap"] = a.ap;
    doc["initial"] = a.initial;
    json states = json::array();
    for (AutStateIndex q = 0; q < a.num_states(); ++q) {
      states.push_back({{"id", q},
                        {"component", a.components[q] == AutComponent::Initial ? "init" : "acc"},
                        {"accepting", a.accepting.count(q) > 0}});
    }
    doc["states"] = states;
    json edges = json::array();
    for (const auto& e : a.edges) {
      edges.push_back(
          {{"from", e.from}, {"guard", e.guard.to_string()}, {"to", e.to}, {"accepting", e.accepting}});
    }
    doc["edges"] = edges;
    json eps = json::array();
    for (const auto& [from, targets] : a.eps_jumps) {
      for (auto to : targets) eps.push_back({{"from", from}, {"to", to}});
    }
    doc["eps"] = eps;
  } else {
    const auto& d = std::get<Dra>(aut);
    doc["kind"] = "dra";
    doc["ap"] = d.ap;
    doc["initial"] = d.initial;
    json states = json::array();
    for (AutStateIndex q = 0; q < d.num_states(); ++q)
      states.push_back({{"id", q}, {"component", "acc"}, {"accepting", false}});
    doc["states"] = states;
    json edges = json::array();
    for (const auto& e : d.edges)
      edges.push_back({{"from", e.from}, {"guard", e.guard.to_string()}, {"to", e.to}});
    doc["edges"] = edges;
    json pairs = json::array();
    for (const auto& pair : d.pairs) {
      pairs.push_back({{"fin", std::vector<AutStateIndex>(pair.fin.begin(), pair.fin.end())},
                       {"inf", std::vector<AutStateIndex>(pair.inf.begin(), pair.inf.end())}});
    }
    doc["pairs"] = pairs;
  }
  return doc.dump(2);
}

}  // namespace mdpst
