#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "mdpst/product.hpp"
#include "mdpst/synthesis.hpp"
#include "mdpst/winning_region.hpp"

namespace mdpst {

struct SimConfig {
  std::size_t runs = 1000;
  std::size_t horizon = 2000;
  std::uint64_t seed = 42;
  std::size_t m = 5;    // trailing windows that must each see an accepting visit
  std::size_t w = 200;  // window length
};

struct RunVerdict {
  bool satisfied = false;
  std::size_t accepting_visits = 0;
  std::optional<std::size_t> violation_step;
};

// One alpha vector per set-valued (state, action, outcome) triple, uniform on
// the simplex (symmetric Dirichlet, unit concentration).
AlphaParams sample_nature(const MdpstModel& model, std::uint64_t seed);

struct NatureSpec {
  enum class Kind { Random, Adversarial } kind = Kind::Random;
  // Adversarial: chosen member per product (state, action, outcome) triple.
  std::map<std::tuple<StateIndex, ActionIndex, std::size_t>, StateIndex> picks;
};

// Worst positional nature induced by the value function (min-argument of the
// robust backup).
NatureSpec adversarial_nature(const ProductMdpst& p, const ValueFunction& values);

struct TrajectoryPoint {
  std::size_t run;
  std::size_t step;
  StateIndex s;
  AutStateIndex q;
};

struct SimReport {
  std::vector<RunVerdict> runs;
  double satisfied_fraction = 0.0;
};

// Per run: a fresh nature (derived from seed and run index) stays fixed for
// the whole run; verdict satisfied iff no dead end occurs and every trailing
// window sees an accepting product state.
SimReport simulate(const ProductMdpst& p, const MdpstStrategy& strategy, const NatureSpec& nature,
                   const SimConfig& cfg, std::vector<TrajectoryPoint>* trajectory = nullptr);

// Convenience wrapper building the product first.
SimReport simulate(const MdpstModel& model, const Automaton& aut, const MdpstStrategy& strategy,
                   const NatureSpec& nature, const SimConfig& cfg,
                   std::vector<TrajectoryPoint>* trajectory = nullptr);

std::string sim_report_to_json(const SimReport& report, const SimConfig& cfg);
std::string sim_report_to_csv(const SimReport& report);
std::string trajectory_to_csv(const std::vector<TrajectoryPoint>& points);

}  // namespace mdpst
