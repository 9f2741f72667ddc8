#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "mdpst/ltl.hpp"
#include "mdpst/product.hpp"

namespace mdpst {

struct MarkovChain {
  StateIndex initial = 0;
  // row s: (target, probability), each row summing to 1
  std::vector<std::vector<std::pair<StateIndex, double>>> rows;

  std::size_t num_states() const { return rows.size(); }
};

// Probability of visiting `acc` infinitely often: reach probability of the
// accepting bottom SCCs, solved exactly per state by Gaussian elimination.
std::vector<double> chain_buchi_probabilities(const MarkovChain& c, const std::set<StateIndex>& acc);
double chain_buchi_probability(const MarkovChain& c, const std::set<StateIndex>& acc);

// Probability of ever reaching `targets` (targets made absorbing).
std::vector<double> chain_reach_probabilities(const MarkovChain& c,
                                              const std::set<StateIndex>& targets);

enum class Objective { Buchi, Reach };

// Exact max over positional deterministic strategies of min over positional
// natures, per state. Guard-limited to desk-scale instances.
std::vector<double> brute_force_values(const ProductMdpst& p, Objective objective,
                                       const std::set<StateIndex>& targets);
double brute_force_value(const ProductMdpst& p, Objective objective,
                         const std::set<StateIndex>& targets);

// Seeded lassos with stem+loop length <= max_len, letters uniform over 2^ap.
std::vector<Lasso> sample_lassos(const std::vector<std::string>& ap, std::size_t max_len,
                                 std::size_t n, std::uint64_t seed);

}  // namespace mdpst
