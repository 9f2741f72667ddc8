#include "mdpst/product.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace mdpst {

using nlohmann::json;

namespace {

void check_ap(const MdpstModel& model, const std::vector<std::string>& ap) {
  for (const auto& atom : ap) {
    if (std::find(model.props.begin(), model.props.end(), atom) == model.props.end())
      throw std::invalid_argument("automaton atom '" + atom + "' absent from model vocabulary");
  }
}

// Shared scaffolding: action table, labels, names for |S| x |Q| states.
ProductMdpst init_product(const MdpstModel& model, std::size_t aut_states,
                          const std::vector<AutStateIndex>& eps_targets) {
  ProductMdpst p;
  p.base_states = model.num_states();
  p.aut_states = aut_states;
  p.num_model_actions = static_cast<ActionIndex>(model.actions.size());
  p.model.props = model.props;
  p.model.actions = model.actions;
  for (auto q : eps_targets) {
    auto idx = static_cast<ActionIndex>(p.model.actions.size());
    p.model.actions.push_back("eps_q" + std::to_string(q));
    p.eps_target[idx] = q;
  }
  p.model.actions.push_back("tau_rej");

  auto n = p.base_states * p.aut_states;
  p.model.labels.resize(n);
  p.model.state_names.resize(n);
  p.model.transitions.resize(n);
  for (StateIndex s = 0; s < p.base_states; ++s) {
    for (AutStateIndex q = 0; q < p.aut_states; ++q) {
      auto x = p.index_of(s, q);
      p.model.labels[x] = model.labels[s];
      p.model.state_names[x] = "(" + model.state_display(s) + "," + std::to_string(q) + ")";
    }
  }
  return p;
}

ActionIndex tau_rej_index(const ProductMdpst& p) {
  return static_cast<ActionIndex>(p.model.actions.size() - 1);
}

// Model outcomes lifted to automaton successor q2, order preserved so that
// alpha parameters keyed on base (s, a, outcome) stay aligned.
std::vector<SetOutcome> lift_outcomes(const ProductMdpst& p, const std::vector<SetOutcome>& outs,
                                      AutStateIndex q2) {
  std::vector<SetOutcome> lifted;
  lifted.reserve(outs.size());
  for (const auto& outcome : outs) {
    SetOutcome lift;
    lift.prob = outcome.prob;
    for (auto t : outcome.targets) lift.targets.push_back(p.index_of(t, q2));
    lifted.push_back(std::move(lift));
  }
  return lifted;
}

}  // namespace

ProductMdpst build_product(const MdpstModel& model, const Ldba& a) {
  check_ap(model, a.ap);
  std::set<AutStateIndex> jump_targets;
  for (const auto& [from, targets] : a.eps_jumps) {
    (void)from;
    jump_targets.insert(targets.begin(), targets.end());
  }
  auto p = init_product(model, a.num_states(),
                        std::vector<AutStateIndex>(jump_targets.begin(), jump_targets.end()));
  std::map<AutStateIndex, ActionIndex> eps_action;
  for (const auto& [act, q] : p.eps_target) eps_action[q] = act;

  for (StateIndex s = 0; s < p.base_states; ++s) {
    const auto& letter = model.labels[s];
    for (AutStateIndex q = 0; q < p.aut_states; ++q) {
      auto x = p.index_of(s, q);
      auto& entries = p.model.transitions[x];
      const auto* edge = ldba_step_edge(a, q, letter);
      if (edge) {
        for (const auto& entry : model.transitions[s])
          entries.push_back({entry.action, lift_outcomes(p, entry.outcomes, edge->to)});
      }
      auto jumps = a.eps_jumps.find(q);
      if (jumps != a.eps_jumps.end()) {
        for (auto q2 : jumps->second)
          entries.push_back({eps_action.at(q2), {{1.0, {p.index_of(s, q2)}}}});
      }
      if (entries.empty()) {
        entries.push_back({tau_rej_index(p), {{1.0, {x}}}});
        continue;  // dead-end, never accepting
      }
      if (edge && (a.accepting.count(q) || edge->accepting)) p.accepting.insert(x);
    }
  }
  p.model.initial = p.index_of(model.initial, a.initial);
  for (AutStateIndex q = 0; q < p.aut_states; ++q) {
    if (a.components[q] == AutComponent::Initial) p.prefix_aut.insert(q);
  }
  return p;
}

ProductMdpst build_product_dra(const MdpstModel& model, const Dra& d) {
  check_ap(model, d.ap);
  auto p = init_product(model, d.num_states(), {});
  for (StateIndex s = 0; s < p.base_states; ++s) {
    const auto& letter = model.labels[s];
    for (AutStateIndex q = 0; q < p.aut_states; ++q) {
      auto x = p.index_of(s, q);
      auto q2 = dra_step(d, q, letter);
      for (const auto& entry : model.transitions[s])
        p.model.transitions[x].push_back({entry.action, lift_outcomes(p, entry.outcomes, q2)});
    }
  }
  p.model.initial = p.index_of(model.initial, d.initial);
  for (const auto& pair : d.pairs) {
    ProductPair lifted;
    for (StateIndex s = 0; s < p.base_states; ++s) {
      for (auto q : pair.fin) lifted.fin.insert(p.index_of(s, q));
      for (auto q : pair.inf) lifted.inf.insert(p.index_of(s, q));
    }
    p.pairs.push_back(std::move(lifted));
  }
  return p;
}

std::size_t product_edge_count(const ProductMdpst& p) {
  std::size_t count = 0;
  for (const auto& entries : p.model.transitions) {
    for (const auto& entry : entries) count += entry.outcomes.size();
  }
  return count;
}

std::string product_to_json(const ProductMdpst& p) {
  auto doc = json::parse(model_to_json(p.model));
  doc["base_states"] = p.base_states;
  doc["aut_states"] = p.aut_states;
  doc["num_model_actions"] = p.num_model_actions;
  doc["accepting"] = std::vector<StateIndex>(p.accepting.begin(), p.accepting.end());
  json eps = json::array();
  for (const auto& [act, q] : p.eps_target) eps.push_back({{"action", act}, {"to_q", q}});
  doc["eps_actions"] = eps;
  json pairs = json::array();
  for (const auto& pair : p.pairs) {
    pairs.push_back({{"fin", std::vector<StateIndex>(pair.fin.begin(), pair.fin.end())},
                     {"inf", std::vector<StateIndex>(pair.inf.begin(), pair.inf.end())}});
  }
  doc["pairs"] = pairs;
  if (!p.prefix_aut.empty())
    doc["prefix_aut"] = std::vector<AutStateIndex>(p.prefix_aut.begin(), p.prefix_aut.end());
  return doc.dump(2);
}

namespace {

ProductMdpst product_from_json(const json& doc) {
  ProductMdpst p;
  p.model = load_model_json(doc.dump());
  p.base_states = doc.value("base_states", p.model.num_states());
  p.aut_states = doc.value("aut_states", std::size_t{1});
  if (p.base_states * p.aut_states != p.model.num_states())
    throw std::runtime_error("product JSON: base_states * aut_states != state count");
  p.num_model_actions =
      doc.value("num_model_actions", static_cast<ActionIndex>(p.model.actions.size()));
  if (doc.contains("eps_actions")) {
    for (const auto& e : doc.at("eps_actions"))
      p.eps_target[e.at("action").get<ActionIndex>()] = e.at("to_q").get<AutStateIndex>();
  }
  if (doc.contains("accepting")) {
    for (const auto& x : doc.at("accepting")) {
      auto state = x.get<StateIndex>();
      if (state >= p.model.num_states()) throw std::runtime_error("product JSON: accepting state out of range");
      p.accepting.insert(state);
    }
  }
  if (doc.contains("pairs")) {
    for (const auto& pr : doc.at("pairs")) {
      ProductPair pair;
      for (const auto& x : pr.at("fin")) pair.fin.insert(x.get<StateIndex>());
      for (const auto& x : pr.at("inf")) pair.inf.insert(x.get<StateIndex>());
      p.pairs.push_back(std::move(pair));
    }
  }
  if (doc.contains("prefix_aut")) {
    for (const auto& x : doc.at("prefix_aut")) {
      auto q = x.get<AutStateIndex>();
      if (q >= p.aut_states) throw std::runtime_error("product JSON: prefix_aut state out of range");
      p.prefix_aut.insert(q);
    }
  }
  return p;
}

}  // namespace

ProductMdpst load_product_json(const std::string& text) {
  return product_from_json(json::parse(text));
}

ProductMdpst load_product_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open product file: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& err) {
    throw std::runtime_error(path + ": " + err.what());
  }
  return product_from_json(doc);
}

std::string product_to_dot(const ProductMdpst& p) {
  std::ostringstream out;
  out << "digraph product {\n  rankdir=LR;\n";
  for (StateIndex x = 0; x < p.model.num_states(); ++x) {
    out << "  s" << x << " [label=\"" << p.model.state_display(x) << "\""
        << (p.accepting.count(x) ? ", shape=doublecircle" : ", shape=circle") << "];\n";
  }
  std::size_t surrogate = 0;
  for (StateIndex x = 0; x < p.model.num_states(); ++x) {
    for (const auto& entry : p.model.transitions[x]) {
      for (const auto& outcome : entry.outcomes) {
        if (outcome.targets.size() == 1) {
          out << "  s" << x << " -> s" << outcome.targets[0] << " [label=\""
              << p.model.actions[entry.action] << ":" << outcome.prob << "\"];\n";
          continue;
        }
        auto node = "h" + std::to_string(surrogate++);
        out << "  " << node << " [shape=point];\n";
        out << "  s" << x << " -> " << node << " [label=\"" << p.model.actions[entry.action]
            << ":" << outcome.prob << "\"];\n";
        for (auto t : outcome.targets) out << "  " << node << " -> s" << t << " [style=dashed];\n";
      }
    }
  }
  out << "}\n";
  return out.str();
}

}  // namespace mdpst
