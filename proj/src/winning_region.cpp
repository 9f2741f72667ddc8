#include "mdpst/winning_region.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace mdpst {

using nlohmann::json;

namespace {

SubProduct prune_impl(const ProductMdpst& p, const std::set<StateIndex>& banned,
                      const std::set<StateIndex>& acc,
                      const std::vector<StateIndex>* forward_seeds = nullptr) {
  const auto n = p.model.num_states();
  auto allowed = [&banned](StateIndex s) { return banned.count(s) == 0; };

  // Optimistic member graph: s -> s' iff s' sits in some set of some action.
  std::vector<std::vector<StateIndex>> succs(n), preds(n);
  for (StateIndex s = 0; s < n; ++s) {
    if (!allowed(s)) continue;
    for (const auto& entry : p.model.transitions[s]) {
      for (const auto& outcome : entry.outcomes) {
        for (auto t : outcome.targets) {
          if (!allowed(t)) continue;
          succs[s].push_back(t);
          preds[t].push_back(s);
        }
      }
    }
  }

  auto closure = [n](const std::vector<StateIndex>& seeds,
                     const std::vector<std::vector<StateIndex>>& adj) {
    std::vector<bool> seen(n, false);
    std::vector<StateIndex> queue;
    for (auto s : seeds) {
      if (!seen[s]) {
        seen[s] = true;
        queue.push_back(s);
      }
    }
    while (!queue.empty()) {
      auto s = queue.back();
      queue.pop_back();
      for (auto t : adj[s]) {
        if (!seen[t]) {
          seen[t] = true;
          queue.push_back(t);
        }
      }
    }
    return seen;
  };

  std::vector<StateIndex> acc_seeds;
  for (auto s : acc) {
    if (allowed(s)) acc_seeds.push_back(s);
  }
  std::vector<StateIndex> seeds;
  if (forward_seeds) {
    for (auto s : *forward_seeds) {
      if (allowed(s)) seeds.push_back(s);
    }
  } else if (allowed(p.model.initial)) {
    seeds.push_back(p.model.initial);
  }
  auto forward = closure(seeds, succs);
  auto backward = closure(acc_seeds, preds);

  SubProduct sub;
  for (StateIndex s = 0; s < n; ++s) {
    if (forward[s] && backward[s]) sub.retained.insert(s);
  }

  // Optimistic eviction: a state survives while some action has some set
  // member retained.
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto it = sub.retained.begin(); it != sub.retained.end();) {
      bool has_action = false;
      for (const auto& entry : p.model.transitions[*it]) {
        for (const auto& outcome : entry.outcomes) {
          for (auto t : outcome.targets) {
            if (sub.retained.count(t)) {
              has_action = true;
              break;
            }
          }
          if (has_action) break;
        }
        if (has_action) break;
      }
      if (!has_action) {
        it = sub.retained.erase(it);
        changed = true;
      } else {
        ++it;
      }
    }
  }

  sub.transitions.resize(n);
  for (auto s : sub.retained) {
    for (const auto& entry : p.model.transitions[s]) {
      SubAction act;
      act.action = entry.action;
      for (const auto& outcome : entry.outcomes) {
        SubOutcome so;
        so.prob = outcome.prob;
        for (auto t : outcome.targets) {
          if (sub.retained.count(t)) so.targets.push_back(t);
        }
        if (so.targets.empty()) {
          act.lost_mass += outcome.prob;
          continue;
        }
        so.dead = so.targets.size() < outcome.targets.size();
        act.outcomes.push_back(std::move(so));
      }
      if (!act.outcomes.empty()) sub.transitions[s].push_back(std::move(act));
    }
  }
  for (auto s : acc) {
    if (sub.retained.count(s)) sub.accepting.insert(s);
  }
  return sub;
}

// Returns the states additionally evicted by the fixpoint.
std::vector<StateIndex> restrict_strict_impl(SubProduct& sub, const std::set<StateIndex>& removed) {
  for (auto s : removed) {
    sub.retained.erase(s);
    sub.accepting.erase(s);
    if (s < sub.transitions.size()) sub.transitions[s].clear();
  }
  std::vector<StateIndex> evicted;
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto it = sub.retained.begin(); it != sub.retained.end();) {
      auto& actions = sub.transitions[*it];
      actions.erase(std::remove_if(actions.begin(), actions.end(),
                                   [&sub](const SubAction& act) {
                                     if (act.lost_mass > kProbTol) return true;
                                     for (const auto& outcome : act.outcomes) {
                                       if (outcome.dead) return true;
                                       for (auto t : outcome.targets) {
                                         if (!sub.retained.count(t)) return true;
                                       }
                                     }
                                     return false;
                                   }),
                    actions.end());
      if (actions.empty()) {
        evicted.push_back(*it);
        sub.accepting.erase(*it);
        it = sub.retained.erase(it);
        changed = true;
      } else {
        ++it;
      }
    }
  }
  return evicted;
}

}  // namespace

SubProduct prune_relevant(const ProductMdpst& p) { return prune_impl(p, {}, p.accepting); }

void restrict_strict(SubProduct& sub, const std::set<StateIndex>& removed) {
  restrict_strict_impl(sub, removed);
}

RobustTable full_transitions(const ProductMdpst& p) {
  RobustTable table(p.model.num_states());
  for (StateIndex s = 0; s < p.model.num_states(); ++s) {
    for (const auto& entry : p.model.transitions[s]) {
      SubAction act;
      act.action = entry.action;
      for (const auto& outcome : entry.outcomes) act.outcomes.push_back({outcome.prob, outcome.targets, false});
      table[s].push_back(std::move(act));
    }
  }
  return table;
}

SplitProduct split_accepting(const SubProduct& sub) {
  if (sub.accepting.empty()) throw std::invalid_argument("split_accepting: empty accepting set");
  SplitProduct split;
  for (auto s : sub.retained) {
    if (sub.accepting.count(s)) {
      split.in_index[s] = split.states.size();
      split.states.push_back({s, SplitKind::In});
      split.out_index[s] = split.states.size();
      split.states.push_back({s, SplitKind::Out});
    } else {
      split.plain_index[s] = split.states.size();
      split.states.push_back({s, SplitKind::Plain});
    }
  }
  for (const auto& [s, idx] : split.in_index) {
    (void)s;
    split.in_states.insert(idx);
  }

  auto rewire = [&split, &sub](StateIndex t) {
    return static_cast<StateIndex>(sub.accepting.count(t) ? split.in_index.at(t)
                                                          : split.plain_index.at(t));
  };
  split.transitions.resize(split.states.size());
  for (auto s : sub.retained) {
    auto source = sub.accepting.count(s) ? split.out_index.at(s) : split.plain_index.at(s);
    for (const auto& act : sub.transitions[s]) {
      SubAction lifted;
      lifted.action = act.action;
      lifted.lost_mass = act.lost_mass;
      for (const auto& outcome : act.outcomes) {
        SubOutcome so;
        so.prob = outcome.prob;
        so.dead = outcome.dead;
        for (auto t : outcome.targets) so.targets.push_back(rewire(t));
        lifted.outcomes.push_back(std::move(so));
      }
      split.transitions[source].push_back(std::move(lifted));
    }
  }
  for (const auto& [s, idx] : split.in_index) {
    (void)s;
    split.transitions[idx].push_back({kTau0, {{1.0, {static_cast<StateIndex>(idx)}, false}}, 0.0});
  }
  return split;
}

namespace {

std::size_t sweep_threads() {
  if (const char* env = std::getenv("MDPST_THREADS")) {
    auto v = std::strtoul(env, nullptr, 10);
    return v == 0 ? 1 : v;
  }
  return 1;
}

double backup(const RobustTable& transitions, const std::vector<double>& v, std::size_t s) {
  double best = 0.0;
  for (const auto& act : transitions[s]) {
    double q = 0.0;
    for (const auto& outcome : act.outcomes) {
      if (outcome.dead) continue;  // nature steers to a value-0 member
      double worst = 1.0;
      for (auto t : outcome.targets) worst = std::min(worst, v[t]);
      q += outcome.prob * worst;
    }
    best = std::max(best, q);
  }
  return best;
}

}  // namespace

ValueFunction robust_reach_vi(const RobustTable& transitions, std::size_t n,
                              const std::set<std::size_t>& targets, double theta,
                              std::size_t max_iter) {
  if (theta <= 0.0) throw std::invalid_argument("robust_reach_vi: theta must be positive");
  ValueFunction vf;
  vf.values.assign(n, 0.0);
  for (auto t : targets) vf.values.at(t) = 1.0;

  const auto threads = std::min(sweep_threads(), std::size_t{32});
  std::vector<double> next(n, 0.0);
  for (auto t : targets) next[t] = 1.0;

  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    const auto& v = vf.values;
    auto work = [&](std::size_t begin, std::size_t end, double& delta) {
      for (std::size_t s = begin; s < end; ++s) {
        if (targets.count(s)) continue;
        next[s] = backup(transitions, v, s);
        delta = std::max(delta, next[s] - v[s]);
      }
    };
    double delta = 0.0;
    if (threads <= 1 || n < 512) {
      work(0, n, delta);
    } else {
      std::vector<std::thread> pool;
      std::vector<double> deltas(threads, 0.0);
      auto chunk = (n + threads - 1) / threads;
      for (std::size_t i = 0; i < threads; ++i) {
        auto begin = i * chunk;
        auto end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back(work, begin, end, std::ref(deltas[i]));
      }
      for (auto& t : pool) t.join();
      for (auto d : deltas) delta = std::max(delta, d);
    }
    vf.values.swap(next);
    ++vf.iterations;
    if (delta < theta) {
      vf.converged = true;
      break;
    }
  }
  return vf;
}

QualitativeResult qualitative_as_reach(const RobustTable& transitions, std::size_t n,
                                       const std::set<std::size_t>& targets) {
  std::vector<bool> live(n, true);
  QualitativeResult result;
  while (true) {
    result.rank.clear();
    result.action.clear();
    for (auto t : targets) {
      if (live[t]) result.rank[t] = 0;
    }
    bool grew = true;
    std::size_t layer = 0;
    while (grew) {
      grew = false;
      ++layer;
      std::vector<std::pair<std::size_t, ActionIndex>> added;
      for (std::size_t s = 0; s < n; ++s) {
        if (!live[s] || result.rank.count(s)) continue;
        // Among certifying actions, prefer the one with the most mass on
        // already-ranked sets: any choice keeps probability 1, but the
        // induced strategy then descends at the best per-step rate.
        double best_mass = -1.0;
        ActionIndex best_action = 0;
        for (const auto& act : transitions[s]) {
          if (act.lost_mass > kProbTol) continue;
          bool safe = true;
          double progress_mass = 0.0;
          for (const auto& outcome : act.outcomes) {
            if (outcome.dead) {
              safe = false;
              break;
            }
            bool inside = true;
            bool ranked = true;
            for (auto t : outcome.targets) {
              if (!live[t]) inside = false;
              if (!result.rank.count(t)) ranked = false;
            }
            if (!inside) {
              safe = false;
              break;
            }
            if (ranked) progress_mass += outcome.prob;
          }
          if (safe && progress_mass > best_mass && progress_mass > 0.0) {
            best_mass = progress_mass;
            best_action = act.action;
          }
        }
        if (best_mass > 0.0) added.push_back({s, best_action});
      }
      for (const auto& [s, act] : added) {
        result.rank[s] = layer;
        result.action[s] = act;
        grew = true;
      }
    }
    bool removed_any = false;
    for (std::size_t s = 0; s < n; ++s) {
      if (live[s] && !result.rank.count(s)) {
        live[s] = false;
        removed_any = true;
      }
    }
    if (!removed_any) break;
  }
  for (const auto& [s, r] : result.rank) {
    (void)r;
    result.states.insert(s);
  }
  return result;
}

namespace {

// Robust expected hitting times to `targets` (worst set member per outcome),
// plus the argmin policy. Least-fixpoint iteration from zero; within the
// certified region a proper policy exists, so the times stay finite.
std::map<std::size_t, ActionIndex> hitting_time_policy(const RobustTable& transitions,
                                                       std::size_t n,
                                                       const std::set<std::size_t>& targets,
                                                       const QualitativeResult& qr) {
  std::vector<double> time(n, 0.0);
  for (std::size_t sweep = 0; sweep < 100000; ++sweep) {
    double change = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      if (targets.count(s) || transitions[s].empty()) continue;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& act : transitions[s]) {
        double q = 1.0;
        for (const auto& outcome : act.outcomes) {
          double worst = 0.0;
          for (auto t : outcome.targets) worst = std::max(worst, time[t]);
          q += outcome.prob * worst;
        }
        best = std::min(best, q);
      }
      if (best < std::numeric_limits<double>::infinity()) {
        change = std::max(change, best - time[s]);
        time[s] = best;
      }
    }
    if (change < 1e-9) break;
  }

  std::map<std::size_t, ActionIndex> policy;
  RobustTable chosen(n);
  for (std::size_t s = 0; s < n; ++s) {
    if (targets.count(s) || transitions[s].empty()) continue;
    const SubAction* best_act = nullptr;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& act : transitions[s]) {
      double q = 1.0;
      for (const auto& outcome : act.outcomes) {
        double worst = 0.0;
        for (auto t : outcome.targets) worst = std::max(worst, time[t]);
        q += outcome.prob * worst;
      }
      if (q < best) {
        best = q;
        best_act = &act;
      }
    }
    if (best_act) {
      policy[s] = best_act->action;
      chosen[s].push_back(*best_act);
    }
  }
  // The argmin policy must itself certify probability 1; where numerical
  // ties broke the certificate, fall back to the ranking's action.
  auto check = qualitative_as_reach(chosen, n, targets);
  for (auto& [s, action] : policy) {
    if (!check.states.count(s)) {
      auto it = qr.action.find(s);
      if (it != qr.action.end()) action = it->second;
    }
  }
  return policy;
}

WinningRegion wr_impl(const ProductMdpst& p, const WrOptions& opts,
                      const std::set<StateIndex>& banned, const std::set<StateIndex>& acc,
                      const std::vector<StateIndex>* forward_seeds = nullptr) {
  auto sub = prune_impl(p, banned, acc, forward_seeds);
  WinningRegion wr;
  while (true) {
    if (sub.accepting.empty()) return wr;  // empty region
    auto split = split_accepting(sub);
    const auto n = split.states.size();
    auto vf = robust_reach_vi(split.transitions, n, split.in_states, opts.theta);

    QualitativeResult qr;
    std::set<std::size_t> certified;
    if (opts.classifier == Classifier::Qualitative) {
      qr = qualitative_as_reach(split.transitions, n, split.in_states);
      certified = qr.states;
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        if (vf.values[i] >= 1.0 - opts.kappa) certified.insert(i);
      }
    }

    WrIteration log_entry;
    std::set<StateIndex> removed;
    for (auto s : sub.retained) {
      auto idx = sub.accepting.count(s) ? split.out_index.at(s) : split.plain_index.at(s);
      log_entry.values[s] = vf.values[idx];
      if (!certified.count(idx)) removed.insert(s);
    }
    if (removed.empty()) {
      wr.log.push_back(std::move(log_entry));
      if (opts.classifier == Classifier::Numeric)
        qr = qualitative_as_reach(split.transitions, n, split.in_states);
      wr.states = sub.retained;
      wr.accepting = sub.accepting;
      // Region actions follow the shortest robust detour back to acceptance,
      // not just any certifying action: recurrence then happens at the
      // fastest worst-case rate the region supports.
      auto policy = hitting_time_policy(split.transitions, n, split.in_states, qr);
      for (auto s : sub.retained) {
        auto idx = sub.accepting.count(s) ? split.out_index.at(s) : split.plain_index.at(s);
        auto rank_it = qr.rank.find(idx);
        if (rank_it != qr.rank.end()) wr.rank[s] = rank_it->second;
        auto policy_it = policy.find(idx);
        if (policy_it != policy.end()) {
          wr.region_action[s] = policy_it->second;
        } else {
          auto act_it = qr.action.find(idx);
          if (act_it != qr.action.end()) wr.region_action[s] = act_it->second;
        }
      }
      return wr;
    }
    auto evicted = restrict_strict_impl(sub, removed);
    log_entry.removed.assign(removed.begin(), removed.end());
    log_entry.removed.insert(log_entry.removed.end(), evicted.begin(), evicted.end());
    wr.log.push_back(std::move(log_entry));
  }
}

}  // namespace

WinningRegion compute_winning_region(const ProductMdpst& p, const WrOptions& opts) {
  if (p.prefix_aut.empty()) return wr_impl(p, opts, {}, p.accepting);

  // The accepting component is closed, so the removal loop only has to see
  // it; prefix states join the region exactly when they can reach the stable
  // part almost surely.
  const auto n = p.model.num_states();
  std::set<StateIndex> prefix;
  for (StateIndex s = 0; s < p.base_states; ++s) {
    for (auto q : p.prefix_aut) prefix.insert(p.index_of(s, q));
  }

  std::vector<bool> reachable(n, false);
  std::vector<StateIndex> queue{p.model.initial};
  reachable[p.model.initial] = true;
  while (!queue.empty()) {
    auto s = queue.back();
    queue.pop_back();
    for (const auto& entry : p.model.transitions[s]) {
      for (const auto& outcome : entry.outcomes) {
        for (auto t : outcome.targets) {
          if (!reachable[t]) {
            reachable[t] = true;
            queue.push_back(t);
          }
        }
      }
    }
  }
  std::vector<StateIndex> entries;
  for (StateIndex s = 0; s < n; ++s) {
    if (reachable[s] && !prefix.count(s)) entries.push_back(s);
  }

  auto wr = wr_impl(p, opts, prefix, p.accepting, &entries);
  if (wr.states.empty()) return wr;

  std::set<std::size_t> targets(wr.states.begin(), wr.states.end());
  auto qr = qualitative_as_reach(full_transitions(p), n, targets);
  std::size_t base_rank = 0;
  for (const auto& [s, r] : wr.rank) {
    (void)s;
    base_rank = std::max(base_rank, r);
  }
  for (auto s : prefix) {
    if (!reachable[s] || !qr.states.count(s)) continue;
    wr.states.insert(s);
    auto rank_it = qr.rank.find(s);
    if (rank_it != qr.rank.end() && rank_it->second > 0) {
      wr.rank[s] = base_rank + rank_it->second;
      auto act_it = qr.action.find(s);
      if (act_it != qr.action.end()) wr.region_action[s] = act_it->second;
    }
  }
  return wr;
}

WinningRegion winning_region_rabin(const ProductMdpst& p, const WrOptions& opts) {
  if (p.pairs.empty()) throw std::invalid_argument("winning_region_rabin: no Rabin pairs");
  WinningRegion merged;
  for (std::size_t k = 0; k < p.pairs.size(); ++k) {
    auto wr = wr_impl(p, opts, p.pairs[k].fin, p.pairs[k].inf);
    for (auto s : wr.states) {
      if (merged.states.insert(s).second) {
        merged.pair_of[s] = k;
        if (wr.rank.count(s)) merged.rank[s] = wr.rank.at(s);
        if (wr.region_action.count(s)) merged.region_action[s] = wr.region_action.at(s);
      }
    }
    for (auto s : wr.accepting) {
      if (merged.pair_of.count(s) && merged.pair_of.at(s) == k) merged.accepting.insert(s);
    }
    for (auto& entry : wr.log) merged.log.push_back(std::move(entry));
  }
  return merged;
}

std::string winning_region_to_json(const WinningRegion& w) {
  json doc;
  doc["states"] = std::vector<StateIndex>(w.states.begin(), w.states.end());
  doc["accepting"] = std::vector<StateIndex>(w.accepting.begin(), w.accepting.end());
  json rank = json::object();
  for (const auto& [s, r] : w.rank) rank[std::to_string(s)] = r;
  doc["rank"] = rank;
  json action = json::object();
  for (const auto& [s, a] : w.region_action) action[std::to_string(s)] = a;
  doc["region_action"] = action;
  json pair_of = json::object();
  for (const auto& [s, k] : w.pair_of) pair_of[std::to_string(s)] = k;
  doc["pair_of"] = pair_of;
  json log = json::array();
  for (const auto& entry : w.log) {
    json values = json::object();
    for (const auto& [s, v] : entry.values) values[std::to_string(s)] = v;
    log.push_back({{"values", values}, {"removed", entry.removed}});
  }
  doc["iterations"] = log;
  return doc.dump(2);
}

WinningRegion load_winning_region_json(const std::string& text) {
  auto doc = json::parse(text);
  WinningRegion w;
  for (const auto& s : doc.at("states")) w.states.insert(s.get<StateIndex>());
  for (const auto& s : doc.at("accepting")) w.accepting.insert(s.get<StateIndex>());
  for (const auto& [key, value] : doc.at("rank").items())
    w.rank[static_cast<StateIndex>(std::stoul(key))] = value.get<std::size_t>();
  for (const auto& [key, value] : doc.at("region_action").items())
    w.region_action[static_cast<StateIndex>(std::stoul(key))] = value.get<ActionIndex>();
  for (const auto& [key, value] : doc.at("pair_of").items())
    w.pair_of[static_cast<StateIndex>(std::stoul(key))] = value.get<std::size_t>();
  if (doc.contains("iterations")) {
    for (const auto& entry : doc.at("iterations")) {
      WrIteration it;
      for (const auto& [key, value] : entry.at("values").items())
        it.values[static_cast<StateIndex>(std::stoul(key))] = value.get<double>();
      for (const auto& s : entry.at("removed")) it.removed.push_back(s.get<StateIndex>());
      w.log.push_back(std::move(it));
    }
  }
  return w;
}

}  // namespace mdpst
