#include "mdpst/hexworld.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <stdexcept>
#include <vector>

#include "json.hpp"

namespace mdpst {

using nlohmann::json;

namespace {

enum Orient { kN = 0, kE = 1, kS = 2, kW = 3 };
const char* kOrientName[] = {"N", "E", "S", "W"};

enum Dir { dN, dS, dNE, dSE, dNW, dSW };

struct Cell {
  int col;
  int row;
};

Cell neighbor(Cell c, Dir d) {
  bool odd = (c.col & 1) != 0;
  switch (d) {
    case dN: return {c.col, c.row + 1};
    case dS: return {c.col, c.row - 1};
    case dNE: return odd ? Cell{c.col + 1, c.row} : Cell{c.col + 1, c.row + 1};
    case dSE: return odd ? Cell{c.col + 1, c.row - 1} : Cell{c.col + 1, c.row};
    case dNW: return odd ? Cell{c.col - 1, c.row} : Cell{c.col - 1, c.row + 1};
    case dSW: return odd ? Cell{c.col - 1, c.row - 1} : Cell{c.col - 1, c.row};
  }
  return c;
}

// Facing half-plane (< 60 degrees off axis) and the flanking drift cells.
void move_pattern(Orient o, std::vector<Dir>& success, Dir& drift1, Dir& drift2) {
  switch (o) {
    case kN: success = {dN}; drift1 = dNE; drift2 = dNW; break;
    case kS: success = {dS}; drift1 = dSE; drift2 = dSW; break;
    case kE: success = {dNE, dSE}; drift1 = dN; drift2 = dS; break;
    case kW: success = {dNW, dSW}; drift1 = dN; drift2 = dS; break;
  }
}

Orient opposite(Orient o) { return static_cast<Orient>((o + 2) % 4); }

}  // namespace

MdpstModel generate_hexworld(const HexConfig& cfg) {
  const auto& layout = cfg.layout;
  if (layout.nx <= 0 || layout.ny <= 0) throw std::invalid_argument("hexworld: empty grid");
  const int nx = layout.nx, ny = layout.ny;
  auto cell_id = [ny](Cell c) { return c.col * ny + c.row; };
  auto in_grid = [nx, ny](Cell c) { return c.col >= 0 && c.col < nx && c.row >= 0 && c.row < ny; };

  std::map<int, std::string> base_of;
  for (const auto& [label, cells] : layout.bases) {
    for (int cell : cells) {
      if (cell < 0 || cell >= nx * ny) throw std::invalid_argument("hexworld: base cell off grid");
      if (layout.obstacles.count(cell))
        throw std::invalid_argument("hexworld: base placed on an obstacle");
      if (!base_of.emplace(cell, label).second)
        throw std::invalid_argument("hexworld: base label collision at cell " + std::to_string(cell));
    }
  }
  for (int cell : layout.obstacles) {
    if (cell < 0 || cell >= nx * ny) throw std::invalid_argument("hexworld: obstacle off grid");
  }

  MdpstModel model;
  for (const auto& [label, cells] : layout.bases) {
    (void)cells;
    model.props.push_back(label);
  }
  model.props.push_back("obs");
  model.actions = {"FR", "BK", "TR", "TL"};

  const auto n = static_cast<std::size_t>(4 * nx * ny);
  model.labels.resize(n);
  model.state_names.resize(n);
  model.transitions.resize(n);
  model.initial = 0;  // (cell 0, N)

  auto state_of = [](int cell, Orient o) { return static_cast<StateIndex>(cell * 4 + o); };

  for (int col = 0; col < nx; ++col) {
    for (int row = 0; row < ny; ++row) {
      Cell here{col, row};
      int cell = cell_id(here);
      // Off-grid moves stay put; obstacle cells are entered normally.
      auto resolve = [&](Dir d) { return in_grid(neighbor(here, d)) ? cell_id(neighbor(here, d)) : cell; };

      for (int oi = 0; oi < 4; ++oi) {
        auto o = static_cast<Orient>(oi);
        auto x = state_of(cell, o);
        model.state_names[x] = "c" + std::to_string(cell) + "_" + kOrientName[oi];
        if (base_of.count(cell)) model.labels[x].atoms.insert(base_of.at(cell));
        if (layout.obstacles.count(cell)) model.labels[x].atoms.insert("obs");

        auto translate = [&](Orient facing, double p_ok) {
          std::vector<Dir> success;
          Dir drift1 = dN, drift2 = dN;
          move_pattern(facing, success, drift1, drift2);
          std::vector<StateIndex> set;
          for (auto d : success) set.push_back(state_of(resolve(d), o));
          TransitionEntry entry;
          entry.outcomes.push_back({p_ok, set});
          entry.outcomes.push_back({(1.0 - p_ok) / 2.0, {state_of(resolve(drift1), o)}});
          entry.outcomes.push_back({(1.0 - p_ok) / 2.0, {state_of(resolve(drift2), o)}});
          return entry;
        };

        auto fr = translate(o, cfg.p_fr);
        fr.action = 0;
        model.transitions[x].push_back(std::move(fr));
        auto bk = translate(opposite(o), cfg.p_bk);
        bk.action = 1;
        model.transitions[x].push_back(std::move(bk));

        auto tr_state = state_of(cell, static_cast<Orient>((oi + 1) % 4));
        auto tl_state = state_of(cell, static_cast<Orient>((oi + 3) % 4));
        model.transitions[x].push_back({2, {{cfg.p_tr, {tr_state}}, {1.0 - cfg.p_tr, {x}}}});
        model.transitions[x].push_back({3, {{cfg.p_tl, {tl_state}}, {1.0 - cfg.p_tl, {x}}}});
      }
    }
  }
  model.canonicalize();
  return model;
}

namespace {

bool bases_reachable(const HexLayout& layout) {
  // Cell adjacency through obstacle-free cells, from cell 0.
  const int nx = layout.nx, ny = layout.ny;
  std::vector<bool> seen(static_cast<std::size_t>(nx * ny), false);
  if (layout.obstacles.count(0)) return false;
  std::vector<Cell> queue{{0, 0}};
  seen[0] = true;
  while (!queue.empty()) {
    auto c = queue.back();
    queue.pop_back();
    for (auto d : {dN, dS, dNE, dSE, dNW, dSW}) {
      auto t = neighbor(c, d);
      if (t.col < 0 || t.col >= nx || t.row < 0 || t.row >= ny) continue;
      int id = t.col * ny + t.row;
      if (seen[id] || layout.obstacles.count(id)) continue;
      seen[id] = true;
      queue.push_back(t);
    }
  }
  for (const auto& [label, cells] : layout.bases) {
    (void)label;
    for (int cell : cells) {
      if (!seen[cell]) return false;
    }
  }
  return true;
}

}  // namespace

HexLayout default_layout(int nx, int ny) {
  if (nx < 6 || ny < 3) throw std::invalid_argument("default_layout: grid must be at least 6x3");
  HexLayout layout;
  layout.nx = nx;
  layout.ny = ny;
  auto cell = [ny](int col1, int row1) { return (col1 - 1) * ny + (row1 - 1); };  // 1-based
  layout.bases["b1"] = {cell(1, 1)};
  layout.bases["b2"] = {cell(nx, 1)};
  layout.bases["b3"] = {cell((nx + 1) / 2, (ny + 1) / 2)};
  layout.bases["b4"] = {cell(1, ny)};
  layout.bases["b5"] = {cell(nx, ny)};

  std::set<int> base_cells;
  for (const auto& [label, cells] : layout.bases) {
    (void)label;
    base_cells.insert(cells.begin(), cells.end());
  }
  if (base_cells.size() != 5) throw std::invalid_argument("default_layout: base cells collide");

  auto count = static_cast<std::size_t>(0.08 * (nx * ny - 5));
  for (std::uint32_t seed = 7;; ++seed) {
    std::mt19937 rng(seed);
    std::vector<int> candidates;
    for (int c = 0; c < nx * ny; ++c) {
      if (!base_cells.count(c)) candidates.push_back(c);
    }
    layout.obstacles.clear();
    for (std::size_t i = 0; i < count && !candidates.empty(); ++i) {
      auto idx = rng() % candidates.size();
      layout.obstacles.insert(candidates[idx]);
      candidates.erase(candidates.begin() + static_cast<long>(idx));
    }
    if (bases_reachable(layout)) break;
  }
  return layout;
}

namespace {

HexLayout layout_from_json(const json& doc) {
  HexLayout layout;
  layout.nx = doc.at("nx").get<int>();
  layout.ny = doc.at("ny").get<int>();
  for (const auto& c : doc.at("obstacles")) layout.obstacles.insert(c.get<int>());
  for (const auto& [label, cells] : doc.at("bases").items()) {
    for (const auto& c : cells) layout.bases[label].insert(c.get<int>());
  }
  return layout;
}

}  // namespace

HexLayout load_layout_json(const std::string& text) { return layout_from_json(json::parse(text)); }

HexLayout load_layout_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open layout file: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& err) {
    throw std::runtime_error(path + ": " + err.what());
  }
  return layout_from_json(doc);
}

std::string layout_to_json(const HexLayout& layout) {
  json doc;
  doc["nx"] = layout.nx;
  doc["ny"] = layout.ny;
  doc["obstacles"] = std::vector<int>(layout.obstacles.begin(), layout.obstacles.end());
  json bases = json::object();
  for (const auto& [label, cells] : layout.bases)
    bases[label] = std::vector<int>(cells.begin(), cells.end());
  doc["bases"] = bases;
  return doc.dump(2);
}

}  // namespace mdpst
