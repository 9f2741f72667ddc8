#include "doctest.h"

#include <string>

#include "mdpst/automata.hpp"
#include "mdpst/product.hpp"
#include "mdpst/winning_region.hpp"

using namespace mdpst;

namespace {

ProductMdpst golden_product() {
  return load_product_file(std::string(FIXTURE_DIR) + "/appendix_b.json");
}

// Indices in the golden fixture: S1..S10 are 0..9.
constexpr StateIndex S1 = 0, S2 = 1, S3 = 2, S4 = 3, S5 = 4, S6 = 5, S7 = 6, S8 = 7, S9 = 8,
                     S10 = 9;

}  // namespace

TEST_SUITE("winning_region") {

TEST_CASE("pruning drops the unreachable sink and keeps the rest") {
  auto p = golden_product();
  auto sub = prune_relevant(p);
  CHECK(sub.retained == std::set<StateIndex>{S1, S2, S3, S4, S5, S6, S7, S8, S9});
  CHECK(sub.accepting == std::set<StateIndex>{S4, S5});
  // The dropped outcome at S1 turns into lost mass, not renormalization.
  REQUIRE(sub.transitions[S1].size() == 1);
  CHECK(sub.transitions[S1][0].lost_mass == doctest::Approx(0.2));
  CHECK(sub.transitions[S1][0].outcomes.size() == 1);
}

TEST_CASE("pruning with no accepting states retains nothing") {
  auto p = golden_product();
  p.accepting.clear();
  auto sub = prune_relevant(p);
  CHECK(sub.retained.empty());
}

TEST_CASE("fully connected accepting pair survives pruning") {
  ProductMdpst p;
  p.model = load_model_json(R"({
    "props": [], "actions": ["a"], "initial": 0,
    "states": [{"id": 0}, {"id": 1}],
    "transitions": [
      {"from": 0, "action": "a", "outcomes": [{"prob": 1.0, "targets": [1]}]},
      {"from": 1, "action": "a", "outcomes": [{"prob": 1.0, "targets": [0]}]}
    ]})");
  p.base_states = 2;
  p.aut_states = 1;
  p.accepting = {0, 1};
  auto sub = prune_relevant(p);
  CHECK(sub.retained == std::set<StateIndex>{0, 1});
}

TEST_CASE("split duplicates accepting states and rewires their incoming sets") {
  auto p = golden_product();
  auto sub = prune_relevant(p);
  auto split = split_accepting(sub);
  CHECK(split.states.size() == sub.retained.size() + 2);
  CHECK(split.in_states.size() == 2);
  // In-copies only carry the self-loop.
  for (auto idx : split.in_states) {
    REQUIRE(split.transitions[idx].size() == 1);
    CHECK(split.transitions[idx][0].action == kTau0);
    CHECK(split.transitions[idx][0].outcomes[0].targets ==
          std::vector<StateIndex>{static_cast<StateIndex>(idx)});
  }
  // S2's set {S4,S5} now points at the two in-copies.
  auto s2 = split.plain_index.at(S2);
  bool found = false;
  for (const auto& act : split.transitions[s2]) {
    for (const auto& outcome : act.outcomes) {
      if (outcome.targets.size() == 2) {
        found = true;
        for (auto t : outcome.targets) CHECK(split.in_states.count(t) == 1);
      }
    }
  }
  CHECK(found);
}

TEST_CASE("split on a self-looping accepting singleton routes into the in-copy") {
  SubProduct sub;
  sub.retained = {0};
  sub.accepting = {0};
  sub.transitions.resize(1);
  sub.transitions[0].push_back({0, {{1.0, {0}, false}}, 0.0});
  auto split = split_accepting(sub);
  REQUIRE(split.states.size() == 2);
  auto out = split.out_index.at(0);
  CHECK(split.transitions[out][0].outcomes[0].targets ==
        std::vector<StateIndex>{static_cast<StateIndex>(split.in_index.at(0))});
}

TEST_CASE("split refuses an empty accepting set") {
  SubProduct sub;
  sub.retained = {0};
  sub.transitions.resize(1);
  CHECK_THROWS_AS(split_accepting(sub), std::invalid_argument);
}

TEST_CASE("first-iteration values match the hand fixpoint") {
  auto p = golden_product();
  auto sub = prune_relevant(p);
  auto split = split_accepting(sub);
  auto vf = robust_reach_vi(split.transitions, split.states.size(), split.in_states, 1e-9);
  CHECK(vf.converged);
  auto value = [&](StateIndex s) {
    auto idx = sub.accepting.count(s) ? split.out_index.at(s) : split.plain_index.at(s);
    return vf.values[idx];
  };
  CHECK(value(S1) == doctest::Approx(0.8).epsilon(1e-6));
  CHECK(value(S2) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(value(S3) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(value(S4) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(value(S5) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(value(S6) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(value(S7) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(value(S8) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(value(S9) == doctest::Approx(0.94).epsilon(1e-6));
}

TEST_CASE("value iteration pins targets and stays within bounds") {
  auto p = golden_product();
  auto table = full_transitions(p);
  std::set<std::size_t> targets{S2, S3, S4};
  auto vf = robust_reach_vi(table, p.model.num_states(), targets, 1e-9);
  for (auto t : targets) CHECK(vf.values[t] == 1.0);
  for (auto v : vf.values) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0 + 1e-9);
  }
  // Targets = everything converges immediately.
  std::set<std::size_t> all;
  for (StateIndex s = 0; s < p.model.num_states(); ++s) all.insert(s);
  auto trivial = robust_reach_vi(table, p.model.num_states(), all, 1e-9);
  CHECK(trivial.iterations == 1);
  for (auto v : trivial.values) CHECK(v == 1.0);
}

TEST_CASE("first-iteration certified set matches the hand fixpoint") {
  auto p = golden_product();
  auto sub = prune_relevant(p);
  auto split = split_accepting(sub);
  auto qr = qualitative_as_reach(split.transitions, split.states.size(), split.in_states);
  std::set<std::size_t> expected{split.plain_index.at(S2), split.plain_index.at(S3),
                                 split.in_index.at(S4), split.out_index.at(S4),
                                 split.in_index.at(S5)};
  CHECK(qr.states == expected);
}

TEST_CASE("certified set on a deterministic chain includes the whole chain") {
  RobustTable table(2);
  table[0].push_back({0, {{1.0, {1}, false}}, 0.0});
  table[1].push_back({0, {{1.0, {1}, false}}, 0.0});
  auto qr = qualitative_as_reach(table, 2, {1});
  CHECK(qr.states == std::set<std::size_t>{0, 1});
  CHECK(qr.rank.at(0) == 1);
  // Unreachable targets certify nothing beyond themselves.
  RobustTable island(2);
  island[0].push_back({0, {{1.0, {0}, false}}, 0.0});
  island[1].push_back({0, {{1.0, {1}, false}}, 0.0});
  auto qr2 = qualitative_as_reach(island, 2, {1});
  CHECK(qr2.states == std::set<std::size_t>{1});
}

TEST_CASE("removal loop terminates on the golden region in two rounds") {
  auto p = golden_product();
  WrOptions opts;
  opts.theta = 1e-9;
  auto wr = compute_winning_region(p, opts);
  CHECK(wr.states == std::set<StateIndex>{S2, S3, S4});
  CHECK(wr.accepting == std::set<StateIndex>{S4});
  CHECK(wr.log.size() == 2);
  // Iteration 1 removed everything outside the region, including S10 never entering.
  std::set<StateIndex> removed(wr.log[0].removed.begin(), wr.log[0].removed.end());
  CHECK(removed == std::set<StateIndex>{S1, S5, S6, S7, S8, S9});
  CHECK(wr.log[0].values.at(S1) == doctest::Approx(0.8).epsilon(1e-6));
  CHECK(wr.log[0].values.at(S9) == doctest::Approx(0.94).epsilon(1e-6));
  // Progress structure: S2 advances with action b after S5's removal kills action a.
  CHECK(wr.region_action.at(S2) == 1);
  CHECK(wr.rank.at(S2) == 1);
  CHECK(wr.rank.at(S3) == 2);
  CHECK(wr.rank.at(S4) == 3);
}

TEST_CASE("numeric classifier reproduces the golden region") {
  auto p = golden_product();
  WrOptions opts;
  opts.theta = 1e-9;
  opts.classifier = Classifier::Numeric;
  opts.kappa = 1e-2;
  auto wr = compute_winning_region(p, opts);
  CHECK(wr.states == std::set<StateIndex>{S2, S3, S4});
}

TEST_CASE("empty accepting set yields an empty region") {
  auto p = golden_product();
  p.accepting.clear();
  auto wr = compute_winning_region(p);
  CHECK(wr.states.empty());
}

TEST_CASE("rabin region with empty fin reduces to the buchi region") {
  auto p = golden_product();
  ProductPair pair;
  pair.inf = p.accepting;
  p.pairs.push_back(pair);
  WrOptions opts;
  opts.theta = 1e-9;
  auto rabin = winning_region_rabin(p, opts);
  auto buchi = compute_winning_region(p, opts);
  CHECK(rabin.states == buchi.states);
  CHECK(rabin.pair_of.at(S2) == 0);
  // A pair with empty inf contributes nothing.
  ProductPair empty_pair;
  p.pairs = {empty_pair};
  CHECK(winning_region_rabin(p, opts).states.empty());
}

TEST_CASE("set refinement never shrinks values") {
  auto p = golden_product();
  WrOptions opts;
  opts.theta = 1e-9;
  auto base_wr = compute_winning_region(p, opts);
  auto table = full_transitions(p);
  std::set<std::size_t> targets(base_wr.states.begin(), base_wr.states.end());
  auto before = robust_reach_vi(table, p.model.num_states(), targets, 1e-9);

  // Shrink {S4,S5} at S2 to {S4}: nature loses an option.
  auto refined = p;
  for (auto& entry : refined.model.transitions[S2]) {
    if (entry.action == 0) entry.outcomes[0].targets = {S4};
  }
  auto refined_wr = compute_winning_region(refined, opts);
  for (auto s : base_wr.states) CHECK(refined_wr.states.count(s) == 1);
  auto refined_table = full_transitions(refined);
  std::set<std::size_t> refined_targets(refined_wr.states.begin(), refined_wr.states.end());
  auto after = robust_reach_vi(refined_table, p.model.num_states(), refined_targets, 1e-9);
  for (StateIndex s = 0; s < p.model.num_states(); ++s)
    CHECK(after.values[s] >= before.values[s] - 1e-9);
}

TEST_CASE("prefix decomposition matches the plain removal loop") {
  // LDBA products carry the initial/accepting component split; solving the
  // accepting component alone and extending almost-surely must land on the
  // same region as the loop over the whole product.
  auto model = load_model_json(R"({
    "props": ["g", "h"],
    "actions": ["go", "stay"],
    "initial": 0,
    "states": [{"id": 0}, {"id": 1, "label": ["g"]}, {"id": 2, "label": ["h"]}],
    "transitions": [
      {"from": 0, "action": "go", "outcomes": [{"prob": 0.6, "targets": [1]}, {"prob": 0.4, "targets": [0, 2]}]},
      {"from": 0, "action": "stay", "outcomes": [{"prob": 1.0, "targets": [0]}]},
      {"from": 1, "action": "go", "outcomes": [{"prob": 1.0, "targets": [2]}]},
      {"from": 1, "action": "stay", "outcomes": [{"prob": 1.0, "targets": [1]}]},
      {"from": 2, "action": "go", "outcomes": [{"prob": 1.0, "targets": [1]}]},
      {"from": 2, "action": "stay", "outcomes": [{"prob": 1.0, "targets": [2]}]}
    ]})");
  auto p = build_product(model, fixture_ldba_gf("g"));
  REQUIRE_FALSE(p.prefix_aut.empty());
  auto fast = compute_winning_region(p);
  auto generic = p;
  generic.prefix_aut.clear();
  auto slow = compute_winning_region(generic);
  CHECK(fast.states == slow.states);
  CHECK(fast.accepting == slow.accepting);
}

TEST_CASE("region JSON round-trips") {
  auto p = golden_product();
  auto wr = compute_winning_region(p);
  auto back = load_winning_region_json(winning_region_to_json(wr));
  CHECK(back.states == wr.states);
  CHECK(back.accepting == wr.accepting);
  CHECK(back.rank == wr.rank);
  CHECK(back.region_action == wr.region_action);
  CHECK(back.log.size() == wr.log.size());
}

}  // TEST_SUITE
