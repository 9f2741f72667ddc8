#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "mdpst/product.hpp"

namespace mdpst {

// Outcome inside a pruned model. `dead` marks sets whose original members
// were not all retained: nature can steer there, so the set is worth 0 and
// disqualifies its action from prob-1 claims.
struct SubOutcome {
  double prob = 0.0;
  std::vector<StateIndex> targets;
  bool dead = false;
};

struct SubAction {
  ActionIndex action = 0;
  std::vector<SubOutcome> outcomes;
  double lost_mass = 0.0;  // mass of outcomes dropped entirely
};

using RobustTable = std::vector<std::vector<SubAction>>;

struct SubProduct {
  std::set<StateIndex> retained;
  std::set<StateIndex> accepting;  // subset of retained
  RobustTable transitions;         // indexed by product state, empty off retained
};

// Forward-reachable from the initial state intersected with backward-reachable
// from the accepting set, both over the optimistic member graph. Actions are
// kept optimistically (dead members flagged, fully dropped outcomes become
// lost mass); only action-less states are evicted, to a fixpoint.
SubProduct prune_relevant(const ProductMdpst& p);

// Strict restriction after removing `removed`: an action dies when any of its
// sets leaks outside the retained states (dead members and lost mass count as
// leaks); action-less states evicted to a fixpoint.
void restrict_strict(SubProduct& sub, const std::set<StateIndex>& removed);

// Full product as a RobustTable (no pruning), for the final value pass.
RobustTable full_transitions(const ProductMdpst& p);

enum class SplitKind { Plain, In, Out };

struct SplitState {
  StateIndex origin = 0;
  SplitKind kind = SplitKind::Plain;
};

// Accepting states duplicated into a tau0-self-looping in-copy (the
// reachability target) and an out-copy carrying the outgoing actions; set
// members pointing at accepting states are rewired to in-copies.
struct SplitProduct {
  std::vector<SplitState> states;
  std::map<StateIndex, std::size_t> plain_index, in_index, out_index;
  RobustTable transitions;
  std::set<std::size_t> in_states;
};

constexpr ActionIndex kTau0 = static_cast<ActionIndex>(-1);

SplitProduct split_accepting(const SubProduct& sub);

struct ValueFunction {
  std::vector<double> values;
  std::size_t iterations = 0;
  bool converged = false;
};

// V := 1 on targets; elsewhere sweeps of
//   V(s) = max_a sum_sets prob * min over members of V
// where dead sets contribute 0. Stops when the sup-norm change drops below
// theta. MDPST_THREADS caps the per-sweep parallelism.
ValueFunction robust_reach_vi(const RobustTable& transitions, std::size_t n,
                              const std::set<std::size_t>& targets, double theta,
                              std::size_t max_iter = 1000000);

struct QualitativeResult {
  std::set<std::size_t> states;                // max-min reach probability exactly 1
  std::map<std::size_t, std::size_t> rank;     // distance-like layer toward the targets
  std::map<std::size_t, ActionIndex> action;   // rank-justifying action (rank > 0)
};

// Exact prob-1 set via the double fixpoint: the inner ranking admits an
// action only when every set stays inside the live set X (no dead members,
// no lost mass) and some set lands fully in the previous rank; states that
// fail leave X and the ranking restarts.
QualitativeResult qualitative_as_reach(const RobustTable& transitions, std::size_t n,
                                       const std::set<std::size_t>& targets);

enum class Classifier { Qualitative, Numeric };

struct WrOptions {
  double theta = 1e-3;
  Classifier classifier = Classifier::Qualitative;
  double kappa = 1e-2;  // numeric classifier: prob-1 iff V >= 1 - kappa
};

struct WrIteration {
  std::map<StateIndex, double> values;  // out-copy value for accepting states
  std::vector<StateIndex> removed;
};

struct WinningRegion {
  std::set<StateIndex> states;
  std::set<StateIndex> accepting;
  std::map<StateIndex, std::size_t> rank;
  std::map<StateIndex, ActionIndex> region_action;
  std::map<StateIndex, std::size_t> pair_of;  // Rabin only: winning pair per state
  std::vector<WrIteration> log;
};

// Removal loop: classify prob-1 reachability of the in-copies on the split
// model, drop every state not certified, restrict strictly, repeat until
// stable or the accepting set empties.
WinningRegion compute_winning_region(const ProductMdpst& p, const WrOptions& opts = {});

// Per Rabin pair: delete the Fin states, run the loop with Acc = Inf, union
// the regions (first winning pair tags each state).
WinningRegion winning_region_rabin(const ProductMdpst& p, const WrOptions& opts = {});

std::string winning_region_to_json(const WinningRegion& w);
WinningRegion load_winning_region_json(const std::string& text);

}  // namespace mdpst
