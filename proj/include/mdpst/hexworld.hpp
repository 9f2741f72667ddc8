#pragma once

#include <map>
#include <set>
#include <string>

#include "mdpst/model.hpp"

namespace mdpst {

// Flat-top hexes in nx offset columns of ny cells; odd columns sit half a
// cell lower. Cell id = col * ny + row, row 0 at the south edge.
struct HexLayout {
  int nx = 0;
  int ny = 0;
  std::set<int> obstacles;
  std::map<std::string, std::set<int>> bases;
};

struct HexConfig {
  HexLayout layout;
  double p_fr = 0.8;
  double p_bk = 0.7;
  double p_tr = 0.9;
  double p_tl = 0.9;
};

// States are (cell, orientation N/S/E/W), index cell*4 + orientation; initial
// is (cell 0, N). FR success is the <=2-cell facing half-plane at the listed
// probability; the residue drifts to the two flanking single cells. BK
// mirrors FR through the opposite half-plane; TR/TL rotate in place. Off-grid
// targets clamp to the current cell. Obstacle cells are ordinary states
// labeled `obs`; base cells carry their base atom.
MdpstModel generate_hexworld(const HexConfig& cfg);

// b1..b5 at the corners and center, obstacles 8% of the remaining cells from
// a fixed seed, re-rolled while any base is unreachable through
// obstacle-free cells. Requires nx >= 6, ny >= 3.
HexLayout default_layout(int nx, int ny);

HexLayout load_layout_json(const std::string& text);
HexLayout load_layout_file(const std::string& path);
std::string layout_to_json(const HexLayout& layout);

}  // namespace mdpst
