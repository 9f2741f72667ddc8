#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mdpst/automata.hpp"
#include "mdpst/product.hpp"
#include "mdpst/winning_region.hpp"

namespace mdpst {

// Optional in-region variant: cycle through the accepting states, steering by
// per-target rank tables; states without an entry fall back to the default
// region action.
struct RoundRobinTable {
  std::vector<StateIndex> targets;                       // accepting states, cycle order
  std::vector<std::map<StateIndex, ActionIndex>> moves;  // one table per target
};

struct ProductStrategy {
  std::map<StateIndex, ActionIndex> prefix_choice;  // outside the region, value > 0
  std::map<StateIndex, ActionIndex> region_mode;    // rank-following inside the region
  std::map<StateIndex, std::size_t> ranks;
  ValueFunction values;
  std::optional<RoundRobinTable> round_robin;
};

// Memoryful (automaton-state) strategy on the base model, eps steps folded
// into the jump script.
struct MdpstStrategy {
  AutStateIndex initial_memory = 0;
  std::map<std::pair<StateIndex, AutStateIndex>, ActionIndex> choices;  // base-model action
  std::map<std::pair<StateIndex, AutStateIndex>, AutStateIndex> jumps;
  std::vector<std::string> actions;  // base-model action names
  double value = 0.0;
  std::optional<RoundRobinTable> round_robin;  // product-state keyed
};

struct SolutionReport {
  double value = 0.0;
  std::size_t product_states = 0;
  std::size_t product_edges = 0;
  std::size_t wr_size = 0;
  std::size_t wr_iterations = 0;
  std::size_t vi_iterations = 0;
  double t_mdl = 0.0;  // seconds: product construction
  double t_sys = 0.0;  // seconds: region + values + extraction
};

// Second value pass over the full product with the region as target.
ValueFunction reach_values_to_wr(const ProductMdpst& p, const WinningRegion& w, double theta);

ProductStrategy extract_strategy(const ProductMdpst& p, const WinningRegion& w,
                                 const ValueFunction& v);

// Per-target rank tables over the final restricted region.
RoundRobinTable build_round_robin(const ProductMdpst& p, const WinningRegion& w);

MdpstStrategy induce_strategy(const ProductStrategy& ps, const ProductMdpst& p);

struct SolveOptions {
  double theta = 1e-3;
  Classifier classifier = Classifier::Qualitative;
  double kappa = 1e-2;
  bool round_robin = false;
};

struct Solution {
  SolutionReport report;
  ProductMdpst product;
  WinningRegion region;
  ProductStrategy product_strategy;
  MdpstStrategy strategy;
};

Solution solve(const MdpstModel& model, const Automaton& aut, const SolveOptions& opts = {});

// Variant for inputs already given as a product (accepting set included).
Solution solve_product(const ProductMdpst& p, const SolveOptions& opts = {});

std::string strategy_to_json(const MdpstStrategy& s);
MdpstStrategy load_strategy_json(const std::string& text);
std::string report_to_json(const SolutionReport& r);

}  // namespace mdpst
