#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mdpst/automata.hpp"
#include "mdpst/model.hpp"

namespace mdpst {

struct ProductPair {
  std::set<StateIndex> fin;
  std::set<StateIndex> inf;
};

// Synchronized composition of an MDPST and an automaton. State (s,q) lives at
// index s * aut_states + q; the action table is the base action list followed
// by one eps action per jump target, then tau_rej.
struct ProductMdpst {
  MdpstModel model;
  std::size_t base_states = 0;
  std::size_t aut_states = 0;
  ActionIndex num_model_actions = 0;  // action indices below this are base actions
  std::map<ActionIndex, AutStateIndex> eps_target;
  std::set<StateIndex> accepting;
  std::vector<ProductPair> pairs;  // DRA products only
  // Automaton states of the initial component; the accepting component is
  // closed, so (s,q) with q listed here can never be revisited once left.
  std::set<AutStateIndex> prefix_aut;

  StateIndex index_of(StateIndex s, AutStateIndex q) const {
    return static_cast<StateIndex>(s * aut_states + q);
  }
  std::pair<StateIndex, AutStateIndex> project(StateIndex x) const {
    return {static_cast<StateIndex>(x / aut_states), static_cast<AutStateIndex>(x % aut_states)};
  }
  bool is_eps(ActionIndex a) const { return eps_target.count(a) > 0; }
  bool is_tau_rej(ActionIndex a) const {
    return a >= num_model_actions && !is_eps(a);
  }
};

// Letter read at (s,q) is L(s); when delta(q, L(s)) is undefined the model
// action is dropped, and action-less states get a tau_rej self-loop.
ProductMdpst build_product(const MdpstModel& model, const Ldba& a);
ProductMdpst build_product_dra(const MdpstModel& model, const Dra& d);

// Number of (state, action, set-outcome) triples.
std::size_t product_edge_count(const ProductMdpst& p);

std::string product_to_json(const ProductMdpst& p);
ProductMdpst load_product_json(const std::string& text);
ProductMdpst load_product_file(const std::string& path);

// Graphviz export; set-valued outcomes drawn through surrogate nodes.
std::string product_to_dot(const ProductMdpst& p);

}  // namespace mdpst
