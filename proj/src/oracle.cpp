#include "mdpst/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>

namespace mdpst {

namespace {

std::vector<std::vector<StateIndex>> chain_sccs(const MarkovChain& c) {
  // Iterative Tarjan.
  const auto n = c.num_states();
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<StateIndex> stack;
  std::vector<std::vector<StateIndex>> sccs;
  int next_index = 0;

  struct Frame {
    StateIndex v;
    std::size_t edge;
  };
  for (StateIndex root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    std::vector<Frame> frames{{root, 0}};
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!frames.empty()) {
      auto& f = frames.back();
      if (f.edge < c.rows[f.v].size()) {
        auto w = c.rows[f.v][f.edge++].first;
        if (index[w] == -1) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = true;
          frames.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
      } else {
        if (low[f.v] == index[f.v]) {
          std::vector<StateIndex> scc;
          while (true) {
            auto w = stack.back();
            stack.pop_back();
            on_stack[w] = false;
            scc.push_back(w);
            if (w == f.v) break;
          }
          sccs.push_back(std::move(scc));
        }
        auto v = f.v;
        frames.pop_back();
        if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
      }
    }
  }
  return sccs;
}

// Reach probabilities with `ones` absorbing; zero outside the backward
// closure of `ones`, dense Gaussian elimination on the rest.
std::vector<double> solve_reach(const MarkovChain& c, const std::set<StateIndex>& ones) {
  const auto n = c.num_states();
  std::vector<bool> can_reach(n, false);
  std::vector<std::vector<StateIndex>> preds(n);
  for (StateIndex s = 0; s < n; ++s) {
    for (const auto& [t, prob] : c.rows[s]) {
      (void)prob;
      preds[t].push_back(s);
    }
  }
  std::vector<StateIndex> queue(ones.begin(), ones.end());
  for (auto s : ones) can_reach[s] = true;
  while (!queue.empty()) {
    auto s = queue.back();
    queue.pop_back();
    for (auto pred : preds[s]) {
      if (!can_reach[pred]) {
        can_reach[pred] = true;
        queue.push_back(pred);
      }
    }
  }

  std::vector<StateIndex> unknowns;
  std::vector<int> slot(n, -1);
  for (StateIndex s = 0; s < n; ++s) {
    if (can_reach[s] && !ones.count(s)) {
      slot[s] = static_cast<int>(unknowns.size());
      unknowns.push_back(s);
    }
  }

  const auto m = unknowns.size();
  // x_s = sum_t P(s,t) x_t + sum_{t in ones} P(s,t)
  std::vector<std::vector<double>> a(m, std::vector<double>(m + 1, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    a[i][i] = 1.0;
    for (const auto& [t, prob] : c.rows[unknowns[i]]) {
      if (ones.count(t)) {
        a[i][m] += prob;
      } else if (slot[t] >= 0) {
        a[i][static_cast<std::size_t>(slot[t])] -= prob;
      }
    }
  }
  // Partial pivoting.
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t pivot = col;
    for (std::size_t row = col + 1; row < m; ++row) {
      if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
    }
    if (std::abs(a[pivot][col]) < 1e-12)
      throw std::runtime_error("singular reachability system (chain nearly degenerate)");
    std::swap(a[col], a[pivot]);
    for (std::size_t row = 0; row < m; ++row) {
      if (row == col) continue;
      double factor = a[row][col] / a[col][col];
      if (factor == 0.0) continue;
      for (std::size_t k = col; k <= m; ++k) a[row][k] -= factor * a[col][k];
    }
  }

  std::vector<double> values(n, 0.0);
  for (auto s : ones) values[s] = 1.0;
  for (std::size_t i = 0; i < m; ++i)
    values[unknowns[i]] = std::clamp(a[i][m] / a[i][i], 0.0, 1.0);
  return values;
}

void check_chain(const MarkovChain& c) {
  for (std::size_t s = 0; s < c.num_states(); ++s) {
    double mass = 0.0;
    for (const auto& [t, prob] : c.rows[s]) {
      if (t >= c.num_states()) throw std::invalid_argument("chain target out of range");
      mass += prob;
    }
    if (std::abs(mass - 1.0) > kProbTol)
      throw std::invalid_argument("chain row " + std::to_string(s) + " mass != 1");
  }
}

}  // namespace

std::vector<double> chain_buchi_probabilities(const MarkovChain& c,
                                              const std::set<StateIndex>& acc) {
  check_chain(c);
  std::set<StateIndex> good;
  for (const auto& scc : chain_sccs(c)) {
    std::set<StateIndex> members(scc.begin(), scc.end());
    bool bottom = true;
    bool accepting = false;
    for (auto s : scc) {
      if (acc.count(s)) accepting = true;
      for (const auto& [t, prob] : c.rows[s]) {
        (void)prob;
        if (!members.count(t)) bottom = false;
      }
    }
    if (bottom && accepting) good.insert(members.begin(), members.end());
  }
  return solve_reach(c, good);
}

double chain_buchi_probability(const MarkovChain& c, const std::set<StateIndex>& acc) {
  return chain_buchi_probabilities(c, acc).at(c.initial);
}

std::vector<double> chain_reach_probabilities(const MarkovChain& c,
                                              const std::set<StateIndex>& targets) {
  check_chain(c);
  return solve_reach(c, targets);
}

namespace {

struct NatureSlot {
  StateIndex state;
  std::size_t outcome;  // index into the chosen entry's outcomes
  std::size_t arity;
};

}  // namespace

std::vector<double> brute_force_values(const ProductMdpst& p, Objective objective,
                                       const std::set<StateIndex>& targets) {
  const auto& model = p.model;
  const auto n = model.num_states();
  if (n > 14) throw std::invalid_argument("brute force guard: more than 14 states");
  for (auto t : targets) {
    if (t >= n) throw std::invalid_argument("brute force: target out of range");
  }

  double strategy_count = 1.0;
  for (StateIndex s = 0; s < n; ++s) {
    if (model.transitions[s].size() > 4)
      throw std::invalid_argument("brute force guard: more than 4 actions at a state");
    strategy_count *= static_cast<double>(model.transitions[s].size());
  }
  if (strategy_count > 2e6) throw std::invalid_argument("brute force guard: strategy space too large");

  std::vector<double> best(n, 0.0);
  std::vector<std::size_t> choice(n, 0);  // strategy odometer

  while (true) {
    // Nature slots for the chosen actions.
    std::vector<NatureSlot> slots;
    double nature_count = 1.0;
    for (StateIndex s = 0; s < n; ++s) {
      const auto& entry = model.transitions[s][choice[s]];
      for (std::size_t i = 0; i < entry.outcomes.size(); ++i) {
        if (entry.outcomes[i].targets.size() > 1) {
          slots.push_back({s, i, entry.outcomes[i].targets.size()});
          nature_count *= static_cast<double>(entry.outcomes[i].targets.size());
        }
      }
    }
    if (nature_count > 2e5)
      throw std::invalid_argument("brute force guard: nature space too large");

    std::vector<double> strategy_value(n, 1.0);
    std::vector<std::size_t> pick(slots.size(), 0);
    while (true) {
      MarkovChain chain;
      chain.initial = model.initial;
      chain.rows.resize(n);
      std::size_t slot_cursor = 0;
      for (StateIndex s = 0; s < n; ++s) {
        const auto& entry = model.transitions[s][choice[s]];
        for (std::size_t i = 0; i < entry.outcomes.size(); ++i) {
          const auto& outcome = entry.outcomes[i];
          StateIndex t = outcome.targets.size() == 1
                             ? outcome.targets[0]
                             : outcome.targets[pick[slot_cursor++]];
          chain.rows[s].push_back({t, outcome.prob});
        }
      }
      auto values = objective == Objective::Buchi ? chain_buchi_probabilities(chain, targets)
                                                  : chain_reach_probabilities(chain, targets);
      for (StateIndex s = 0; s < n; ++s) strategy_value[s] = std::min(strategy_value[s], values[s]);

      std::size_t k = 0;
      for (; k < slots.size(); ++k) {
        if (++pick[k] < slots[k].arity) break;
        pick[k] = 0;
      }
      if (k == slots.size()) break;
    }
    for (StateIndex s = 0; s < n; ++s) best[s] = std::max(best[s], strategy_value[s]);

    std::size_t k = 0;
    for (; k < n; ++k) {
      if (++choice[k] < model.transitions[k].size()) break;
      choice[k] = 0;
    }
    if (k == n) break;
  }
  return best;
}

double brute_force_value(const ProductMdpst& p, Objective objective,
                         const std::set<StateIndex>& targets) {
  return brute_force_values(p, objective, targets).at(p.model.initial);
}

std::vector<Lasso> sample_lassos(const std::vector<std::string>& ap, std::size_t max_len,
                                 std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_lassos: n must be >= 1");
  if (max_len < 1) throw std::invalid_argument("sample_lassos: max_len must be >= 1");
  std::mt19937_64 rng(seed);
  auto draw = [&rng](std::size_t bound) { return static_cast<std::size_t>(rng() % bound); };
  std::vector<Lasso> lassos;
  lassos.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto total = 1 + draw(max_len);
    auto stem_len = draw(total);  // loop keeps >= 1 letter
    Lasso w;
    auto letter = [&] {
      LabelSet l;
      for (const auto& atom : ap) {
        if (rng() & 1u) l.atoms.insert(atom);
      }
      return l;
    };
    for (std::size_t j = 0; j < stem_len; ++j) w.stem.push_back(letter());
    for (std::size_t j = stem_len; j < total; ++j) w.loop.push_back(letter());
    lassos.push_back(std::move(w));
  }
  return lassos;
}

}  // namespace mdpst
