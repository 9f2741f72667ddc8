#include "doctest.h"

#include <string>

#include "mdpst/product.hpp"

using namespace mdpst;

namespace {

// Two rooms; room 1 carries the goal atom and a set-valued exit.
MdpstModel two_room_model() {
  return load_model_json(R"({
    "props": ["g", "obs"],
    "actions": ["go", "stay"],
    "initial": 0,
    "states": [
      {"id": 0},
      {"id": 1, "label": ["g"]}
    ],
    "transitions": [
      {"from": 0, "action": "go", "outcomes": [{"prob": 0.7, "targets": [1]}, {"prob": 0.3, "targets": [0]}]},
      {"from": 0, "action": "stay", "outcomes": [{"prob": 1.0, "targets": [0]}]},
      {"from": 1, "action": "go", "outcomes": [{"prob": 1.0, "targets": [0, 1]}]},
      {"from": 1, "action": "stay", "outcomes": [{"prob": 1.0, "targets": [1]}]}
    ]})");
}

}  // namespace

TEST_SUITE("product") {

TEST_CASE("state space is the full grid of model and automaton states") {
  auto model = two_room_model();
  auto a = fixture_ldba_gf("g");
  auto p = build_product(model, a);
  CHECK(p.base_states == 2);
  CHECK(p.aut_states == 2);
  CHECK(p.model.num_states() == 4);
  CHECK(p.num_model_actions == 2);
  CHECK(p.project(p.index_of(1, 1)) == std::pair<StateIndex, AutStateIndex>{1, 1});
  CHECK(p.model.initial == p.index_of(model.initial, a.initial));
}

TEST_CASE("outcome sets lift pointwise and keep their mass") {
  auto model = two_room_model();
  auto a = fixture_ldba_gf("g");
  auto p = build_product(model, a);
  for (StateIndex x = 0; x < p.model.num_states(); ++x) {
    for (const auto& entry : p.model.transitions[x]) {
      double mass = 0.0;
      for (const auto& outcome : entry.outcomes) {
        mass += outcome.prob;
        if (entry.action < p.num_model_actions) {
          // Every member projects to a base successor of the base state.
          auto [s, q] = p.project(x);
          (void)q;
          auto post = post_states(model, s, entry.action);
          for (auto t : outcome.targets) {
            CHECK(post.count(p.project(t).first) == 1);
          }
          // All members share one automaton successor.
          auto q_first = p.project(outcome.targets.front()).second;
          for (auto t : outcome.targets) CHECK(p.project(t).second == q_first);
        }
      }
      CHECK(mass == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("epsilon actions appear exactly at jump-enabled automaton states") {
  auto model = two_room_model();
  auto a = fixture_ldba_gf("g");
  auto p = build_product(model, a);
  std::size_t eps_entries = 0;
  for (StateIndex x = 0; x < p.model.num_states(); ++x) {
    for (const auto& entry : p.model.transitions[x]) {
      if (!p.is_eps(entry.action)) continue;
      ++eps_entries;
      auto [s, q] = p.project(x);
      CHECK(q == a.initial);
      REQUIRE(entry.outcomes.size() == 1);
      CHECK(entry.outcomes[0].prob == doctest::Approx(1.0));
      CHECK(entry.outcomes[0].targets ==
            std::vector<StateIndex>{p.index_of(s, p.eps_target.at(entry.action))});
    }
  }
  CHECK(eps_entries == 2);  // one per base state
}

TEST_CASE("undefined automaton moves drop actions and dead ends self-loop") {
  auto model = two_room_model();
  model.labels[0].atoms.insert("obs");  // room 0 becomes forbidden
  auto a = fixture_ldba_persist_avoid({{"g"}}, "obs");
  auto p = build_product(model, a);
  for (StateIndex x = 0; x < p.model.num_states(); ++x) {
    auto [s, q] = p.project(x);
    if (s != 0) continue;
    // Room 0 reads an obs letter: no letter move survives. The automaton's
    // initial state still offers its epsilon jump; elsewhere only tau_rej.
    CHECK(p.accepting.count(x) == 0);
    if (q == a.initial) {
      for (const auto& entry : p.model.transitions[x]) CHECK(p.is_eps(entry.action));
    } else {
      REQUIRE(p.model.transitions[x].size() == 1);
      CHECK(p.is_tau_rej(p.model.transitions[x][0].action));
      CHECK(p.model.transitions[x][0].outcomes[0].targets == std::vector<StateIndex>{x});
    }
  }
}

TEST_CASE("accepting product states require a defined automaton move") {
  auto model = two_room_model();
  auto a = fixture_ldba_gf("g");
  auto p = build_product(model, a);
  CHECK_FALSE(p.accepting.empty());
  for (auto x : p.accepting) {
    auto [s, q] = p.project(x);
    CHECK(ldba_step(a, q, model.labels[s]).has_value());
  }
  // The recurrence automaton marks progress on the goal letter only.
  auto acc_q = *a.eps_jumps.at(a.initial).begin();
  CHECK(p.accepting.count(p.index_of(1, acc_q)) == 1);
  CHECK(p.accepting.count(p.index_of(0, acc_q)) == 0);
}

TEST_CASE("rabin product lifts the pairs pointwise") {
  auto model = two_room_model();
  model.props = {"b1", "b2", "b3", "b4", "b5", "obs", "g"};
  auto dra = fixture_dra_persist_avoid({{"b1"}, {"b2"}}, "obs");
  auto p = build_product_dra(model, dra);
  CHECK(p.model.num_states() == model.num_states() * dra.num_states());
  REQUIRE(p.pairs.size() == 1);
  for (auto x : p.pairs[0].fin) CHECK(dra.pairs[0].fin.count(p.project(x).second) == 1);
  for (auto x : p.pairs[0].inf) CHECK(dra.pairs[0].inf.count(p.project(x).second) == 1);
  CHECK(p.pairs[0].fin.size() == model.num_states() * dra.pairs[0].fin.size());
  // A total automaton never needs tau_rej.
  for (StateIndex x = 0; x < p.model.num_states(); ++x) {
    for (const auto& entry : p.model.transitions[x]) CHECK_FALSE(p.is_tau_rej(entry.action));
  }
}

TEST_CASE("edge count totals the set-valued outcomes") {
  auto model = two_room_model();
  auto p = build_product(model, fixture_ldba_gf("g"));
  std::size_t count = 0;
  for (StateIndex x = 0; x < p.model.num_states(); ++x) {
    for (const auto& entry : p.model.transitions[x]) count += entry.outcomes.size();
  }
  CHECK(product_edge_count(p) == count);
}

TEST_CASE("product JSON round-trips with the extra fields") {
  auto model = two_room_model();
  auto p = build_product(model, fixture_ldba_gf("g"));
  auto back = load_product_json(product_to_json(p));
  CHECK(back.base_states == p.base_states);
  CHECK(back.aut_states == p.aut_states);
  CHECK(back.num_model_actions == p.num_model_actions);
  CHECK(back.accepting == p.accepting);
  CHECK(back.eps_target == p.eps_target);
  CHECK(back.model.num_states() == p.model.num_states());
  CHECK(product_edge_count(back) == product_edge_count(p));
  // Plain model JSON also loads as a trivial product.
  auto trivial = load_product_json(model_to_json(model));
  CHECK(trivial.base_states == model.num_states());
  CHECK(trivial.aut_states == 1);
  CHECK(trivial.accepting.empty());
}

TEST_CASE("dot export names every product state") {
  auto model = two_room_model();
  auto p = build_product(model, fixture_ldba_gf("g"));
  auto dot = product_to_dot(p);
  CHECK(dot.find("digraph") != std::string::npos);
  for (StateIndex x = 0; x < p.model.num_states(); ++x) {
    CHECK(dot.find(p.model.state_display(x)) != std::string::npos);
  }
}

}  // TEST_SUITE
