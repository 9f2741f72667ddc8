#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace mdpst {

using StateIndex = std::uint32_t;
using ActionIndex = std::uint32_t;

// Tolerance for all probability-mass sum checks.
constexpr double kProbTol = 1e-9;

struct LabelSet {
  std::set<std::string> atoms;

  bool has(const std::string& atom) const { return atoms.count(atom) > 0; }
  bool operator==(const LabelSet& other) const { return atoms == other.atoms; }
  bool operator<(const LabelSet& other) const { return atoms < other.atoms; }
};

// One set-valued outcome: with probability `prob` the successor is some
// member of `targets`, chosen by nature.
struct SetOutcome {
  double prob = 0.0;
  std::vector<StateIndex> targets;  // sorted, unique, nonempty
};

struct TransitionEntry {
  ActionIndex action = 0;
  std::vector<SetOutcome> outcomes;
};

struct ValidationIssue {
  std::string message;
  std::optional<StateIndex> state;
  std::optional<ActionIndex> action;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
  std::string to_string() const;
};

// M = (S, s0, A, F, T, L). Immutable after construction/validation.
struct MdpstModel {
  std::vector<std::string> props;
  std::vector<LabelSet> labels;           // per state
  std::vector<std::string> state_names;   // "" when unnamed
  StateIndex initial = 0;
  std::vector<std::string> actions;
  std::vector<std::vector<TransitionEntry>> transitions;  // per state, sorted by action

  std::size_t num_states() const { return labels.size(); }
  std::size_t num_actions() const { return actions.size(); }

  const std::vector<SetOutcome>* outcomes(StateIndex s, ActionIndex a) const;
  bool applicable(StateIndex s, ActionIndex a) const { return outcomes(s, a) != nullptr; }
  std::optional<ActionIndex> action_index(const std::string& name) const;
  std::string state_display(StateIndex s) const;

  // Merges duplicate target sets under one (s,a) additively and sorts entries.
  void canonicalize();
};

ValidationReport validate_model(const MdpstModel& model);

// Union of all target sets of (s,a). Throws std::invalid_argument when the
// action is not applicable at s.
std::set<StateIndex> post_states(const MdpstModel& model, StateIndex s, ActionIndex a);

bool is_classical_mdp(const MdpstModel& model);

// Per-(s,a,outcome) selection weights over the outcome's target set,
// aligned with SetOutcome::targets.
struct AlphaParams {
  std::map<std::tuple<StateIndex, ActionIndex, std::size_t>, std::vector<double>> weights;

  const std::vector<double>* find(StateIndex s, ActionIndex a, std::size_t outcome) const;
};

// Conditions (i)-(iii) of the feasible-distribution definition. Throws
// std::invalid_argument on missing/ill-formed alpha entries.
std::map<StateIndex, double> realize_feasible_distribution(const MdpstModel& model,
                                                           StateIndex s, ActionIndex a,
                                                           const AlphaParams& alpha);

// JSON model format:
//   { "props": [..], "states": [{"id": int, "name": str?, "label": [str]}],
//     "initial": int, "actions": [str],
//     "transitions": [{"from": int, "action": str,
//                      "outcomes": [{"prob": float, "targets": [int]}]}] }
MdpstModel load_model_json(const std::string& text);
MdpstModel load_model_file(const std::string& path);
std::string model_to_json(const MdpstModel& model);

}  // namespace mdpst
