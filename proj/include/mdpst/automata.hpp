#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "mdpst/ltl.hpp"
#include "mdpst/model.hpp"

namespace mdpst {

using AutStateIndex = std::uint32_t;

enum class AutComponent { Initial, Accepting };

// Symbolic edge guard: propositional formula over the automaton's AP,
// written in the LTL propositional fragment.
struct Guard {
  LtlPtr expr;

  bool eval(const LabelSet& letter) const;
  std::string to_string() const { return ltl_to_string(expr); }
};

Guard parse_guard(const std::string& text);

struct AutEdge {
  AutStateIndex from = 0;
  Guard guard;
  AutStateIndex to = 0;
  // Transition-level Buchi mark. State-level marks live in Ldba::accepting;
  // both count toward acceptance.
  bool accepting = false;
};

struct Ldba {
  std::vector<AutComponent> components;  // per state
  AutStateIndex initial = 0;
  std::vector<std::string> ap;
  std::vector<AutEdge> edges;
  std::map<AutStateIndex, std::set<AutStateIndex>> eps_jumps;  // Initial -> Accepting
  std::set<AutStateIndex> accepting;                           // state-level marks

  std::size_t num_states() const { return components.size(); }
  bool has_edge_marks() const;
  std::vector<const AutEdge*> edges_from(AutStateIndex q) const;
};

struct RabinPair {
  std::set<AutStateIndex> fin;
  std::set<AutStateIndex> inf;
};

struct Dra {
  AutStateIndex initial = 0;
  std::size_t states = 0;
  std::vector<std::string> ap;
  std::vector<AutEdge> edges;  // deterministic and total per state
  std::vector<RabinPair> pairs;

  std::size_t num_states() const { return states; }
  std::vector<const AutEdge*> edges_from(AutStateIndex q) const;
};

using Automaton = std::variant<Ldba, Dra>;

// Checks every structural invariant of Def. 2 plus determinism; warnings for
// empty or epsilon-unreachable accepting sets are prefixed "warning:".
ValidationReport validate_ldba(const Ldba& a);
ValidationReport validate_dra(const Dra& d);

// Unique successor whose guard matches; absent when no guard matches.
std::optional<AutStateIndex> ldba_step(const Ldba& a, AutStateIndex q, const LabelSet& letter);
// The matching edge itself (needed for transition marks).
const AutEdge* ldba_step_edge(const Ldba& a, AutStateIndex q, const LabelSet& letter);
AutStateIndex dra_step(const Dra& d, AutStateIndex q, const LabelSet& letter);

// Exact lasso acceptance: tries every epsilon-jump placement along the
// position-indexed run (stem plus one loop unrolling) and checks the
// reachable cycle for accepting states/marks.
bool ldba_accepts_lasso(const Ldba& a, const Lasso& w);
bool dra_accepts_lasso(const Dra& d, const Lasso& w);

// Hand-built fixtures.
Ldba fixture_ldba_gf(const std::string& atom);
Ldba fixture_ldba_gf_conj(const std::vector<std::string>& atoms);
// Round-robin surveillance of goal groups with a safety atom; letters
// containing the avoid atom have no edge (missing edge = rejection).
Ldba fixture_ldba_persist_avoid(const std::vector<std::vector<std::string>>& goal_groups,
                                const std::string& avoid_atom);
Dra fixture_dra_persist_avoid(const std::vector<std::vector<std::string>>& goal_groups,
                              const std::string& avoid_atom);

// HOA v1 subset loader; Buchi bodies load as Ldba, Rabin as Dra.
Automaton parse_hoa(const std::string& text);

// Native automaton JSON (see to_json for the schema).
Automaton load_automaton_json(const std::string& text);
Automaton load_automaton_file(const std::string& path);
std::string automaton_to_json(const Automaton& a);

}  // namespace mdpst
