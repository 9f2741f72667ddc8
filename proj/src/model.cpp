#include "mdpst/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace mdpst {

using nlohmann::json;

std::string ValidationReport::to_string() const {
  std::ostringstream out;
  for (const auto& issue : issues) {
    if (issue.state) out << "state " << *issue.state;
    if (issue.action) out << " action " << *issue.action;
    if (issue.state || issue.action) out << ": ";
    out << issue.message << "\n";
  }
  return out.str();
}

const std::vector<SetOutcome>* MdpstModel::outcomes(StateIndex s, ActionIndex a) const {
  if (s >= transitions.size()) return nullptr;
  for (const auto& entry : transitions[s]) {
    if (entry.action == a) return &entry.outcomes;
  }
  return nullptr;
}

std::optional<ActionIndex> MdpstModel::action_index(const std::string& name) const {
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (actions[i] == name) return static_cast<ActionIndex>(i);
  }
  return std::nullopt;
}

std::string MdpstModel::state_display(StateIndex s) const {
  if (s < state_names.size() && !state_names[s].empty()) return state_names[s];
  return "s" + std::to_string(s);
}

void MdpstModel::canonicalize() {
  for (auto& entries : transitions) {
    std::sort(entries.begin(), entries.end(),
              [](const TransitionEntry& x, const TransitionEntry& y) { return x.action < y.action; });
    for (auto& entry : entries) {
      for (auto& outcome : entry.outcomes) {
        std::sort(outcome.targets.begin(), outcome.targets.end());
        outcome.targets.erase(std::unique(outcome.targets.begin(), outcome.targets.end()),
                              outcome.targets.end());
      }
      // Merge duplicate target sets additively.
      std::map<std::vector<StateIndex>, double> merged;
      for (const auto& outcome : entry.outcomes) merged[outcome.targets] += outcome.prob;
      entry.outcomes.clear();
      for (const auto& [targets, prob] : merged) entry.outcomes.push_back({prob, targets});
    }
  }
}

ValidationReport validate_model(const MdpstModel& model) {
  ValidationReport report;
  auto add = [&report](std::string msg, std::optional<StateIndex> s = std::nullopt,
                       std::optional<ActionIndex> a = std::nullopt) {
    report.issues.push_back({std::move(msg), s, a});
  };

  const auto n = model.num_states();
  if (model.labels.size() != n || model.state_names.size() != n || model.transitions.size() != n) {
    add("state table sizes inconsistent");
    return report;
  }
  if (n == 0) {
    add("model has no states");
    return report;
  }
  if (model.initial >= n) add("initial state out of range");

  std::set<std::string> names;
  for (StateIndex s = 0; s < n; ++s) {
    const auto& name = model.state_names[s];
    if (!name.empty() && !names.insert(name).second)
      add("duplicate state name '" + name + "'", s);
    for (const auto& atom : model.labels[s].atoms) {
      if (std::find(model.props.begin(), model.props.end(), atom) == model.props.end())
        add("label atom '" + atom + "' not in proposition vocabulary", s);
    }
  }

  for (StateIndex s = 0; s < n; ++s) {
    if (model.transitions[s].empty()) add("state has no applicable action", s);
    std::set<ActionIndex> seen;
    for (const auto& entry : model.transitions[s]) {
      if (entry.action >= model.num_actions()) {
        add("action index out of range", s, entry.action);
        continue;
      }
      if (!seen.insert(entry.action).second) add("duplicate action entry", s, entry.action);
      double mass = 0.0;
      std::set<std::vector<StateIndex>> sets;
      for (const auto& outcome : entry.outcomes) {
        if (outcome.targets.empty()) add("empty target set", s, entry.action);
        if (!(outcome.prob > 0.0 && outcome.prob <= 1.0 + kProbTol))
          add("outcome probability " + std::to_string(outcome.prob) + " outside (0,1]", s, entry.action);
        for (auto t : outcome.targets) {
          if (t >= n) add("target state " + std::to_string(t) + " out of range", s, entry.action);
        }
        if (!sets.insert(outcome.targets).second)
          add("duplicate target set under one (state, action)", s, entry.action);
        mass += outcome.prob;
      }
      if (std::abs(mass - 1.0) > kProbTol)
        add("probability mass " + std::to_string(mass) + " != 1", s, entry.action);
    }
  }
  return report;
}

std::set<StateIndex> post_states(const MdpstModel& model, StateIndex s, ActionIndex a) {
  const auto* outcomes = model.outcomes(s, a);
  if (!outcomes) throw std::invalid_argument("no such action at state " + model.state_display(s));
  std::set<StateIndex> post;
  for (const auto& outcome : *outcomes) {
    if (outcome.prob > 0.0) post.insert(outcome.targets.begin(), outcome.targets.end());
  }
  return post;
}

bool is_classical_mdp(const MdpstModel& model) {
  for (const auto& entries : model.transitions) {
    for (const auto& entry : entries) {
      for (const auto& outcome : entry.outcomes) {
        if (outcome.targets.size() != 1) return false;
      }
    }
  }
  return true;
}

const std::vector<double>* AlphaParams::find(StateIndex s, ActionIndex a, std::size_t outcome) const {
  auto it = weights.find({s, a, outcome});
  return it == weights.end() ? nullptr : &it->second;
}

std::map<StateIndex, double> realize_feasible_distribution(const MdpstModel& model,
                                                           StateIndex s, ActionIndex a,
                                                           const AlphaParams& alpha) {
  const auto* outcomes = model.outcomes(s, a);
  if (!outcomes) throw std::invalid_argument("no such action at state " + model.state_display(s));
  std::map<StateIndex, double> dist;
  for (std::size_t i = 0; i < outcomes->size(); ++i) {
    const auto& outcome = (*outcomes)[i];
    if (outcome.targets.size() == 1) {
      // Singleton forces alpha = 1 regardless of supplied parameters.
      dist[outcome.targets[0]] += outcome.prob;
      continue;
    }
    const auto* w = alpha.find(s, a, i);
    if (!w) throw std::invalid_argument("alpha missing for outcome " + std::to_string(i));
    if (w->size() != outcome.targets.size())
      throw std::invalid_argument("alpha size mismatch for outcome " + std::to_string(i));
    double sum = 0.0;
    for (double x : *w) {
      if (x < 0.0) throw std::invalid_argument("negative alpha weight");
      sum += x;
    }
    if (std::abs(sum - 1.0) > kProbTol)
      throw std::invalid_argument("alpha weights sum to " + std::to_string(sum) + " != 1");
    for (std::size_t j = 0; j < outcome.targets.size(); ++j)
      dist[outcome.targets[j]] += (*w)[j] * outcome.prob;
  }
  return dist;
}

namespace {

MdpstModel model_from_json(const json& doc) {
  MdpstModel model;
  if (!doc.is_object()) throw std::runtime_error("model JSON: top level must be an object");
  model.props = doc.at("props").get<std::vector<std::string>>();
  model.actions = doc.at("actions").get<std::vector<std::string>>();

  const auto& states = doc.at("states");
  model.labels.resize(states.size());
  model.state_names.resize(states.size());
  model.transitions.resize(states.size());
  for (const auto& st : states) {
    auto id = st.at("id").get<std::size_t>();
    if (id >= states.size()) throw std::runtime_error("model JSON: state id " + std::to_string(id) + " out of range");
    if (st.contains("name")) model.state_names[id] = st.at("name").get<std::string>();
    if (st.contains("label")) {
      for (const auto& atom : st.at("label")) model.labels[id].atoms.insert(atom.get<std::string>());
    }
  }
  model.initial = doc.at("initial").get<StateIndex>();

  for (const auto& tr : doc.at("transitions")) {
    auto from = tr.at("from").get<StateIndex>();
    if (from >= states.size()) throw std::runtime_error("model JSON: transition 'from' out of range");
    auto action_name = tr.at("action").get<std::string>();
    auto action = model.action_index(action_name);
    if (!action) throw std::runtime_error("model JSON: unknown action '" + action_name + "'");
    TransitionEntry* entry = nullptr;
    for (auto& e : model.transitions[from]) {
      if (e.action == *action) entry = &e;
    }
    if (!entry) {
      model.transitions[from].push_back({*action, {}});
      entry = &model.transitions[from].back();
    }
    for (const auto& oc : tr.at("outcomes")) {
      SetOutcome outcome;
      outcome.prob = oc.at("prob").get<double>();
      outcome.targets = oc.at("targets").get<std::vector<StateIndex>>();
      entry->outcomes.push_back(std::move(outcome));
    }
  }
  model.canonicalize();

  auto report = validate_model(model);
  if (!report.ok()) throw std::runtime_error("model JSON: invalid model\n" + report.to_string());
  return model;
}

}  // namespace

MdpstModel load_model_json(const std::string& text) {
  return model_from_json(json::parse(text));
}

MdpstModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& err) {
    throw std::runtime_error(path + ": " + err.what());
  }
  return model_from_json(doc);
}

std::string model_to_json(const MdpstModel& model) {
  json doc;
  doc["props"] = model.props;
  doc["actions"] = model.actions;
  doc["initial"] = model.initial;
  json states = json::array();
  for (StateIndex s = 0; s < model.num_states(); ++s) {
    json st;
    st["id"] = s;
    if (!model.state_names[s].empty()) st["name"] = model.state_names[s];
    st["label"] = model.labels[s].atoms;
    states.push_back(st);
  }
  doc["states"] = states;
  json transitions = json::array();
  for (StateIndex s = 0; s < model.num_states(); ++s) {
    for (const auto& entry : model.transitions[s]) {
      json tr;
      tr["from"] = s;
      tr["action"] = model.actions[entry.action];
      json outs = json::array();
      for (const auto& outcome : entry.outcomes) {
        outs.push_back({{"prob", outcome.prob}, {"targets", outcome.targets}});
      }
      tr["outcomes"] = outs;
      transitions.push_back(tr);
    }
  }
  doc["transitions"] = transitions;
  return doc.dump(2);
}

}  // namespace mdpst
