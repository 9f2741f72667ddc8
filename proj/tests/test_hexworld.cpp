#include "doctest.h"

#include <string>

#include "mdpst/hexworld.hpp"
#include "mdpst/product.hpp"

using namespace mdpst;

namespace {

HexConfig config_for(int nx, int ny) {
  HexConfig cfg;
  cfg.layout = default_layout(nx, ny);
  return cfg;
}

// States index as cell*4 + orientation with N,E,S,W = 0..3.
constexpr int kN = 0, kE = 1, kS = 2, kW = 3;

StateIndex state_of(const HexLayout& layout, int col, int row, int orient) {
  return static_cast<StateIndex>((col * layout.ny + row) * 4 + orient);
}

}  // namespace

TEST_SUITE("hexworld") {

TEST_CASE("state space is four orientations per cell") {
  auto model = generate_hexworld(config_for(10, 5));
  CHECK(model.num_states() == 200);
  CHECK(model.actions == std::vector<std::string>{"FR", "BK", "TR", "TL"});
  CHECK(model.initial == 0);
  CHECK(model.state_names[0] == "c0_N");
  CHECK(validate_model(model).ok());
}

TEST_CASE("default layout pins bases and rolls three obstacles at 10x5") {
  auto layout = default_layout(10, 5);
  CHECK(layout.obstacles.size() == 3);
  CHECK(layout.bases.size() == 5);
  // Corner and center bases (1-based grid positions).
  CHECK(layout.bases.at("b1") == std::set<int>{0});
  CHECK(layout.bases.at("b2") == std::set<int>{9 * 5});
  CHECK(layout.bases.at("b3") == std::set<int>{4 * 5 + 2});
  CHECK(layout.bases.at("b4") == std::set<int>{4});
  CHECK(layout.bases.at("b5") == std::set<int>{9 * 5 + 4});
  for (int cell : layout.obstacles) {
    bool on_base = false;
    for (const auto& [label, cells] : layout.bases) {
      (void)label;
      on_base = on_base || cells.count(cell);
    }
    CHECK_FALSE(on_base);
  }
  // Deterministic: the same grid always produces the same layout.
  CHECK(default_layout(10, 5).obstacles == layout.obstacles);
  CHECK_THROWS(default_layout(5, 3));
  CHECK_THROWS(default_layout(6, 2));
}

TEST_CASE("labels mark bases and obstacles") {
  auto cfg = config_for(10, 5);
  auto model = generate_hexworld(cfg);
  for (int orient = 0; orient < 4; ++orient) {
    CHECK(model.labels[static_cast<StateIndex>(orient)].has("b1"));
  }
  for (int cell : cfg.layout.obstacles) {
    CHECK(model.labels[static_cast<StateIndex>(cell * 4)].has("obs"));
  }
  std::size_t obs_states = 0;
  for (const auto& label : model.labels) obs_states += label.has("obs") ? 1 : 0;
  CHECK(obs_states == 4 * cfg.layout.obstacles.size());
}

TEST_CASE("forward move from the interior fans into the facing cone") {
  HexConfig cfg;
  cfg.layout.nx = 7;
  cfg.layout.ny = 7;
  cfg.layout.bases["b1"] = {0};
  auto model = generate_hexworld(cfg);

  // Facing east from an even-column interior cell: success set is the two
  // east cells, drifts flank north and south, orientation unchanged.
  int col = 2, row = 3;
  auto x = state_of(cfg.layout, col, row, kE);
  const auto* outcomes = model.outcomes(x, 0);  // FR
  REQUIRE(outcomes != nullptr);
  REQUIRE(outcomes->size() == 3);
  double mass = 0.0;
  bool saw_pair = false;
  for (const auto& outcome : *outcomes) {
    mass += outcome.prob;
    if (outcome.targets.size() == 2) {
      saw_pair = true;
      CHECK(outcome.prob == doctest::Approx(0.8));
      // Even column: NE = (col+1, row+1), SE = (col+1, row).
      CHECK(outcome.targets == std::vector<StateIndex>{
                state_of(cfg.layout, col + 1, row, kE),
                state_of(cfg.layout, col + 1, row + 1, kE)});
    } else {
      CHECK(outcome.prob == doctest::Approx(0.1));
      CHECK((outcome.targets == std::vector<StateIndex>{state_of(cfg.layout, col, row + 1, kE)} ||
             outcome.targets == std::vector<StateIndex>{state_of(cfg.layout, col, row - 1, kE)}));
    }
  }
  CHECK(saw_pair);
  CHECK(mass == doctest::Approx(1.0));

  // Facing north: single-cell success straight up.
  auto xn = state_of(cfg.layout, col, row, kN);
  const auto* up = model.outcomes(xn, 0);
  REQUIRE(up != nullptr);
  for (const auto& outcome : *up) {
    if (outcome.prob > 0.5) {
      CHECK(outcome.targets == std::vector<StateIndex>{state_of(cfg.layout, col, row + 1, kN)});
    }
  }
}

TEST_CASE("backward move mirrors forward through the opposite cone") {
  HexConfig cfg;
  cfg.layout.nx = 7;
  cfg.layout.ny = 7;
  cfg.layout.bases["b1"] = {0};
  auto model = generate_hexworld(cfg);
  int col = 2, row = 3;
  // Facing north, BK drives south at 0.7.
  auto x = state_of(cfg.layout, col, row, kN);
  const auto* outcomes = model.outcomes(x, 1);  // BK
  REQUIRE(outcomes != nullptr);
  bool saw_success = false;
  for (const auto& outcome : *outcomes) {
    if (outcome.prob > 0.5) {
      saw_success = true;
      CHECK(outcome.prob == doctest::Approx(0.7));
      CHECK(outcome.targets == std::vector<StateIndex>{state_of(cfg.layout, col, row - 1, kN)});
    } else {
      CHECK(outcome.prob == doctest::Approx(0.15));
    }
  }
  CHECK(saw_success);
}

TEST_CASE("turns rotate in place and keep the cell") {
  HexConfig cfg;
  cfg.layout.nx = 6;
  cfg.layout.ny = 4;
  cfg.layout.bases["b1"] = {0};
  auto model = generate_hexworld(cfg);
  auto x = state_of(cfg.layout, 3, 2, kN);
  const auto* tr = model.outcomes(x, 2);
  REQUIRE(tr != nullptr);
  for (const auto& outcome : *tr) {
    if (outcome.prob > 0.5) {
      CHECK(outcome.prob == doctest::Approx(0.9));
      CHECK(outcome.targets == std::vector<StateIndex>{state_of(cfg.layout, 3, 2, kE)});
    } else {
      CHECK(outcome.targets == std::vector<StateIndex>{x});
    }
  }
  const auto* tl = model.outcomes(x, 3);
  REQUIRE(tl != nullptr);
  for (const auto& outcome : *tl) {
    if (outcome.prob > 0.5) {
      CHECK(outcome.targets == std::vector<StateIndex>{state_of(cfg.layout, 3, 2, kW)});
    }
  }
}

TEST_CASE("grid edges clamp to the current cell") {
  HexConfig cfg;
  cfg.layout.nx = 6;
  cfg.layout.ny = 4;
  cfg.layout.bases["b1"] = {5};
  auto model = generate_hexworld(cfg);
  // Facing north on the top row: every movement outcome stays in the cell.
  auto x = state_of(cfg.layout, 2, 3, kN);
  const auto* outcomes = model.outcomes(x, 0);
  REQUIRE(outcomes != nullptr);
  for (const auto& outcome : *outcomes) {
    for (auto t : outcome.targets) {
      auto cell = t / 4;
      CHECK((cell == 2 * cfg.layout.ny + 3 || cell == 1 * cfg.layout.ny + 3 ||
             cell == 3 * cfg.layout.ny + 3));
    }
  }
  // South-west corner facing south: fully clamped.
  auto corner = state_of(cfg.layout, 0, 0, kS);
  const auto* south = model.outcomes(corner, 0);
  REQUIRE(south != nullptr);
  for (const auto& outcome : *south) {
    for (auto t : outcome.targets) CHECK(t / 4 <= static_cast<StateIndex>(cfg.layout.ny));
  }
}

TEST_CASE("masses always total one across the whole model") {
  auto model = generate_hexworld(config_for(8, 4));
  for (StateIndex s = 0; s < model.num_states(); ++s) {
    REQUIRE(model.transitions[s].size() == 4);
    for (const auto& entry : model.transitions[s]) {
      double mass = 0.0;
      for (const auto& outcome : entry.outcomes) mass += outcome.prob;
      CHECK(mass == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("layout validation rejects inconsistent placements") {
  HexConfig cfg;
  cfg.layout.nx = 6;
  cfg.layout.ny = 4;
  cfg.layout.bases["b1"] = {99};
  CHECK_THROWS(generate_hexworld(cfg));
  cfg.layout.bases["b1"] = {3};
  cfg.layout.obstacles = {3};
  CHECK_THROWS(generate_hexworld(cfg));
  cfg.layout.obstacles = {200};
  CHECK_THROWS(generate_hexworld(cfg));
}

TEST_CASE("layout JSON round-trips") {
  auto layout = default_layout(10, 5);
  auto back = load_layout_json(layout_to_json(layout));
  CHECK(back.nx == layout.nx);
  CHECK(back.ny == layout.ny);
  CHECK(back.obstacles == layout.obstacles);
  CHECK(back.bases == layout.bases);
}

TEST_CASE("product sizing against the surveillance fixtures") {
  auto model = generate_hexworld(config_for(10, 5));
  std::vector<std::vector<std::string>> groups{{"b1", "b2"}, {"b3"}, {"b4", "b5"}};
  auto ldba = fixture_ldba_persist_avoid(groups, "obs");
  auto p = build_product(model, ldba);
  CHECK(p.model.num_states() == 800);
  auto dra = fixture_dra_persist_avoid(groups, "obs");
  auto pd = build_product_dra(model, dra);
  CHECK(pd.model.num_states() == 1600);
}

}  // TEST_SUITE
