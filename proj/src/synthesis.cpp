#include "mdpst/synthesis.hpp"

#include <algorithm>
#include <chrono>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace mdpst {

using nlohmann::json;

ValueFunction reach_values_to_wr(const ProductMdpst& p, const WinningRegion& w, double theta) {
  std::set<std::size_t> targets(w.states.begin(), w.states.end());
  return robust_reach_vi(full_transitions(p), p.model.num_states(), targets, theta);
}

ProductStrategy extract_strategy(const ProductMdpst& p, const WinningRegion& w,
                                 const ValueFunction& v) {
  ProductStrategy ps;
  ps.values = v;
  for (auto s : w.states) {
    auto rank_it = w.rank.find(s);
    auto act_it = w.region_action.find(s);
    if (rank_it == w.rank.end() || (rank_it->second > 0 && act_it == w.region_action.end()))
      throw std::logic_error("winning-region state " + std::to_string(s) +
                             " has no progress rank; region is inconsistent");
    ps.ranks[s] = rank_it->second;
    if (act_it != w.region_action.end()) {
      ps.region_mode[s] = act_it->second;
    } else {
      // rank 0 without a recorded action: fall back to the first retained
      // action that keeps the play inside the region
      for (const auto& entry : p.model.transitions[s]) {
        bool inside = true;
        for (const auto& outcome : entry.outcomes) {
          for (auto t : outcome.targets) {
            if (!w.states.count(t)) inside = false;
          }
        }
        if (inside) {
          ps.region_mode[s] = entry.action;
          break;
        }
      }
      if (!ps.region_mode.count(s))
        throw std::logic_error("winning-region state " + std::to_string(s) +
                               " has no action staying inside the region");
    }
  }

  for (StateIndex s = 0; s < p.model.num_states(); ++s) {
    if (w.states.count(s) || v.values[s] <= 0.0) continue;
    double best = -1.0;
    ActionIndex best_action = 0;
    for (const auto& entry : p.model.transitions[s]) {
      double q = 0.0;
      for (const auto& outcome : entry.outcomes) {
        double worst = 1.0;
        for (auto t : outcome.targets) worst = std::min(worst, v.values[t]);
        q += outcome.prob * worst;
      }
      if (q > best + 1e-12) {  // ties resolve to the lowest action index
        best = q;
        best_action = entry.action;
      }
    }
    ps.prefix_choice[s] = best_action;
  }
  return ps;
}

RoundRobinTable build_round_robin(const ProductMdpst& p, const WinningRegion& w) {
  RoundRobinTable table;
  // Regions are handled per Rabin pair (a single implicit pair for Buchi).
  std::map<std::size_t, std::set<StateIndex>> groups;
  for (auto s : w.states) {
    auto it = w.pair_of.find(s);
    groups[it == w.pair_of.end() ? 0 : it->second].insert(s);
  }
  for (const auto& [pair, states] : groups) {
    (void)pair;
    SubProduct sub;
    sub.retained = states;
    for (auto s : w.accepting) {
      if (states.count(s)) sub.accepting.insert(s);
    }
    if (sub.accepting.empty()) continue;
    sub.transitions.resize(p.model.num_states());
    for (auto s : states) {
      for (const auto& entry : p.model.transitions[s]) {
        bool inside = true;
        for (const auto& outcome : entry.outcomes) {
          for (auto t : outcome.targets) {
            if (!states.count(t)) inside = false;
          }
        }
        if (!inside) continue;
        SubAction act;
        act.action = entry.action;
        for (const auto& outcome : entry.outcomes) act.outcomes.push_back({outcome.prob, outcome.targets, false});
        sub.transitions[s].push_back(std::move(act));
      }
    }
    auto split = split_accepting(sub);
    for (auto target : sub.accepting) {
      auto qr = qualitative_as_reach(split.transitions, split.states.size(),
                                     {split.in_index.at(target)});
      std::map<StateIndex, ActionIndex> moves;
      for (auto s : states) {
        auto idx = sub.accepting.count(s) ? split.out_index.at(s) : split.plain_index.at(s);
        auto it = qr.action.find(idx);
        if (it != qr.action.end()) moves[s] = it->second;
      }
      table.targets.push_back(target);
      table.moves.push_back(std::move(moves));
    }
  }
  return table;
}

MdpstStrategy induce_strategy(const ProductStrategy& ps, const ProductMdpst& p) {
  MdpstStrategy out;
  out.initial_memory = p.project(p.model.initial).second;
  out.actions.assign(p.model.actions.begin(), p.model.actions.begin() + p.num_model_actions);
  out.value = ps.values.values.empty() ? 0.0 : ps.values.values.at(p.model.initial);
  out.round_robin = ps.round_robin;

  auto choice_at = [&ps](StateIndex x) -> const ActionIndex* {
    auto it = ps.region_mode.find(x);
    if (it != ps.region_mode.end()) return &it->second;
    it = ps.prefix_choice.find(x);
    if (it != ps.prefix_choice.end()) return &it->second;
    return nullptr;
  };

  for (StateIndex x = 0; x < p.model.num_states(); ++x) {
    const auto* a = choice_at(x);
    if (!a) continue;
    auto [s, q] = p.project(x);
    // Collapse eps chains; the scripted jump lands where a model action waits.
    auto cur = x;
    auto act = *a;
    std::set<StateIndex> seen{cur};
    while (p.is_eps(act)) {
      cur = p.index_of(s, p.eps_target.at(act));
      if (!seen.insert(cur).second) throw std::logic_error("eps-action cycle in strategy");
      const auto* next = choice_at(cur);
      if (!next) break;  // jump into a choiceless state: leave unmapped
      act = *next;
    }
    if (p.is_eps(act) || p.is_tau_rej(act)) continue;
    auto q2 = p.project(cur).second;
    if (q2 != q) out.jumps[{s, q}] = q2;
    out.choices[{s, q2}] = act;
  }
  return out;
}

namespace {

Solution solve_common(ProductMdpst product, const SolveOptions& opts, double t_mdl) {
  using clock = std::chrono::steady_clock;
  auto t0 = clock::now();

  Solution sol;
  sol.product = std::move(product);
  const auto& p = sol.product;

  WrOptions wr_opts{opts.theta, opts.classifier, opts.kappa};
  sol.region = p.pairs.empty() ? compute_winning_region(p, wr_opts)
                               : winning_region_rabin(p, wr_opts);
  auto values = reach_values_to_wr(p, sol.region, opts.theta);
  sol.product_strategy = extract_strategy(p, sol.region, values);
  if (opts.round_robin) sol.product_strategy.round_robin = build_round_robin(p, sol.region);
  sol.strategy = induce_strategy(sol.product_strategy, p);

  auto t1 = clock::now();
  sol.report.value = values.values.at(p.model.initial);
  sol.report.product_states = p.model.num_states();
  sol.report.product_edges = product_edge_count(p);
  sol.report.wr_size = sol.region.states.size();
  sol.report.wr_iterations = sol.region.log.size();
  sol.report.vi_iterations = values.iterations;
  sol.report.t_mdl = t_mdl;
  sol.report.t_sys = std::chrono::duration<double>(t1 - t0).count();
  return sol;
}

}  // namespace

Solution solve(const MdpstModel& model, const Automaton& aut, const SolveOptions& opts) {
  using clock = std::chrono::steady_clock;
  auto t0 = clock::now();
  auto product = std::holds_alternative<Ldba>(aut)
                     ? build_product(model, std::get<Ldba>(aut))
                     : build_product_dra(model, std::get<Dra>(aut));
  auto t1 = clock::now();
  return solve_common(std::move(product), opts, std::chrono::duration<double>(t1 - t0).count());
}

Solution solve_product(const ProductMdpst& p, const SolveOptions& opts) {
  return solve_common(p, opts, 0.0);
}

std::string strategy_to_json(const MdpstStrategy& s) {
  json doc;
  doc["memory"] = "automaton-state";
  doc["initial_memory"] = s.initial_memory;
  doc["value"] = s.value;
  doc["actions"] = s.actions;
  json choices = json::array();
  for (const auto& [key, act] : s.choices)
    choices.push_back({{"s", key.first}, {"q", key.second}, {"action", s.actions.at(act)}});
  doc["choices"] = choices;
  json jumps = json::array();
  for (const auto& [key, to] : s.jumps)
    jumps.push_back({{"s", key.first}, {"q", key.second}, {"to_q", to}});
  doc["jumps"] = jumps;
  if (s.round_robin) {
    json rr;
    rr["targets"] = s.round_robin->targets;
    json moves = json::array();
    for (const auto& table : s.round_robin->moves) {
      json entry = json::object();
      for (const auto& [state, act] : table) entry[std::to_string(state)] = act;
      moves.push_back(entry);
    }
    rr["moves"] = moves;
    doc["round_robin"] = rr;
  }
  return doc.dump(2);
}

MdpstStrategy load_strategy_json(const std::string& text) {
  auto doc = json::parse(text);
  MdpstStrategy s;
  s.initial_memory = doc.at("initial_memory").get<AutStateIndex>();
  s.value = doc.at("value").get<double>();
  s.actions = doc.at("actions").get<std::vector<std::string>>();
  for (const auto& c : doc.at("choices")) {
    auto name = c.at("action").get<std::string>();
    auto it = std::find(s.actions.begin(), s.actions.end(), name);
    if (it == s.actions.end()) throw std::runtime_error("strategy JSON: unknown action '" + name + "'");
    s.choices[{c.at("s").get<StateIndex>(), c.at("q").get<AutStateIndex>()}] =
        static_cast<ActionIndex>(it - s.actions.begin());
  }
  for (const auto& j : doc.at("jumps"))
    s.jumps[{j.at("s").get<StateIndex>(), j.at("q").get<AutStateIndex>()}] =
        j.at("to_q").get<AutStateIndex>();
  if (doc.contains("round_robin")) {
    RoundRobinTable rr;
    rr.targets = doc.at("round_robin").at("targets").get<std::vector<StateIndex>>();
    for (const auto& entry : doc.at("round_robin").at("moves")) {
      std::map<StateIndex, ActionIndex> moves;
      for (const auto& [key, value] : entry.items())
        moves[static_cast<StateIndex>(std::stoul(key))] = value.get<ActionIndex>();
      rr.moves.push_back(std::move(moves));
    }
    s.round_robin = std::move(rr);
  }
  return s;
}

std::string report_to_json(const SolutionReport& r) {
  json doc;
  doc["value"] = r.value;
  doc["product_states"] = r.product_states;
  doc["product_edges"] = r.product_edges;
  doc["wr_size"] = r.wr_size;
  doc["wr_iterations"] = r.wr_iterations;
  doc["vi_iterations"] = r.vi_iterations;
  doc["T_mdl"] = r.t_mdl;
  doc["T_sys"] = r.t_sys;
  return doc.dump(2);
}

}  // namespace mdpst
