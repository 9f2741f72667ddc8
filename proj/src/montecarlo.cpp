#include "mdpst/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace mdpst {

using nlohmann::json;

namespace {

std::vector<double> dirichlet_uniform(std::mt19937_64& rng, std::size_t k) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<double> weights(k);
  double sum = 0.0;
  for (auto& w : weights) {
    w = -std::log(1.0 - uniform(rng));
    sum += w;
  }
  for (auto& w : weights) w /= sum;
  return weights;
}

}  // namespace

AlphaParams sample_nature(const MdpstModel& model, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  AlphaParams alpha;
  for (StateIndex s = 0; s < model.num_states(); ++s) {
    for (const auto& entry : model.transitions[s]) {
      for (std::size_t i = 0; i < entry.outcomes.size(); ++i) {
        const auto& outcome = entry.outcomes[i];
        if (outcome.targets.size() < 2) continue;
        alpha.weights[{s, entry.action, i}] = dirichlet_uniform(rng, outcome.targets.size());
      }
    }
  }
  return alpha;
}

NatureSpec adversarial_nature(const ProductMdpst& p, const ValueFunction& values) {
  NatureSpec nature;
  nature.kind = NatureSpec::Kind::Adversarial;
  for (StateIndex x = 0; x < p.model.num_states(); ++x) {
    for (const auto& entry : p.model.transitions[x]) {
      for (std::size_t i = 0; i < entry.outcomes.size(); ++i) {
        const auto& outcome = entry.outcomes[i];
        if (outcome.targets.size() < 2) continue;
        auto worst = outcome.targets.front();
        for (auto t : outcome.targets) {
          if (values.values.at(t) < values.values.at(worst)) worst = t;
        }
        nature.picks[{x, entry.action, i}] = worst;
      }
    }
  }
  return nature;
}

SimReport simulate(const ProductMdpst& p, const MdpstStrategy& strategy, const NatureSpec& nature,
                   const SimConfig& cfg, std::vector<TrajectoryPoint>* trajectory) {
  if (cfg.runs < 1) throw std::invalid_argument("simulate: runs must be >= 1");
  if (cfg.horizon < cfg.m * cfg.w)
    throw std::invalid_argument("simulate: horizon shorter than the satisfaction windows");

  SimReport report;
  report.runs.reserve(cfg.runs);

  for (std::size_t run = 0; run < cfg.runs; ++run) {
    std::seed_seq seq{cfg.seed, static_cast<std::uint64_t>(run)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    // Per-run nature: alpha vectors drawn on demand, fixed once drawn.
    std::map<std::tuple<StateIndex, ActionIndex, std::size_t>, std::vector<double>> alpha;

    RunVerdict verdict;
    std::vector<bool> visit(cfg.horizon, false);
    auto x = p.model.initial;
    std::size_t rr_index = 0;

    for (std::size_t step = 0; step < cfg.horizon; ++step) {
      // Resolve jumps, round-robin overrides, and eps actions into one model action.
      ActionIndex action = 0;
      bool have_action = false;
      for (int guard = 0; guard < 16 && !have_action; ++guard) {
        auto [s, q] = p.project(x);
        while (true) {
          auto jump = strategy.jumps.find({s, q});
          if (jump == strategy.jumps.end()) break;
          q = jump->second;
          x = p.index_of(s, q);
        }
        if (p.accepting.count(x)) visit[step] = true;
        std::optional<ActionIndex> chosen;
        if (strategy.round_robin && !strategy.round_robin->targets.empty()) {
          const auto& rr = *strategy.round_robin;
          if (x == rr.targets[rr_index]) rr_index = (rr_index + 1) % rr.targets.size();
          auto it = rr.moves[rr_index].find(x);
          if (it != rr.moves[rr_index].end()) chosen = it->second;
        }
        if (!chosen) {
          auto it = strategy.choices.find({s, q});
          if (it != strategy.choices.end()) chosen = it->second;
        }
        if (!chosen) break;
        if (p.is_eps(*chosen)) {
          x = p.index_of(s, p.eps_target.at(*chosen));
          continue;
        }
        action = *chosen;
        have_action = true;
      }
      if (p.accepting.count(x)) visit[step] = true;
      if (!have_action || p.is_tau_rej(action)) {
        verdict.violation_step = step;
        break;
      }
      const auto* outcomes = p.model.outcomes(x, action);
      if (!outcomes) {
        verdict.violation_step = step;
        break;
      }

      double roll = uniform(rng);
      const SetOutcome* outcome = &outcomes->back();
      std::size_t outcome_index = outcomes->size() - 1;
      double acc = 0.0;
      for (std::size_t i = 0; i < outcomes->size(); ++i) {
        acc += (*outcomes)[i].prob;
        if (roll < acc) {
          outcome = &(*outcomes)[i];
          outcome_index = i;
          break;
        }
      }

      StateIndex next = outcome->targets.front();
      if (outcome->targets.size() > 1) {
        if (nature.kind == NatureSpec::Kind::Adversarial) {
          auto it = nature.picks.find({x, action, outcome_index});
          if (it != nature.picks.end()) next = it->second;
        } else {
          auto s_base = p.project(x).first;
          auto key = std::make_tuple(s_base, action, outcome_index);
          auto it = alpha.find(key);
          if (it == alpha.end())
            it = alpha.emplace(key, dirichlet_uniform(rng, outcome->targets.size())).first;
          double pick = uniform(rng);
          double mass = 0.0;
          for (std::size_t j = 0; j < outcome->targets.size(); ++j) {
            mass += it->second[j];
            if (pick < mass) {
              next = outcome->targets[j];
              break;
            }
            next = outcome->targets[j];
          }
        }
      }
      if (trajectory) {
        auto [s, q] = p.project(x);
        trajectory->push_back({run, step, s, q});
      }
      x = next;
    }

    for (bool v : visit) verdict.accepting_visits += v ? 1 : 0;
    if (!verdict.violation_step) {
      verdict.satisfied = true;
      for (std::size_t window = 0; window < cfg.m; ++window) {
        auto begin = cfg.horizon - (window + 1) * cfg.w;
        bool seen = false;
        for (std::size_t t = begin; t < begin + cfg.w; ++t) seen = seen || visit[t];
        if (!seen) {
          verdict.satisfied = false;
          break;
        }
      }
    }
    report.runs.push_back(verdict);
  }

  std::size_t satisfied = 0;
  for (const auto& verdict : report.runs) satisfied += verdict.satisfied ? 1 : 0;
  report.satisfied_fraction = static_cast<double>(satisfied) / static_cast<double>(cfg.runs);
  return report;
}

SimReport simulate(const MdpstModel& model, const Automaton& aut, const MdpstStrategy& strategy,
                   const NatureSpec& nature, const SimConfig& cfg,
                   std::vector<TrajectoryPoint>* trajectory) {
  auto product = std::holds_alternative<Ldba>(aut) ? build_product(model, std::get<Ldba>(aut))
                                                   : build_product_dra(model, std::get<Dra>(aut));
  return simulate(product, strategy, nature, cfg, trajectory);
}

std::string sim_report_to_json(const SimReport& report, const SimConfig& cfg) {
  json doc;
  doc["config"] = {{"runs", cfg.runs}, {"horizon", cfg.horizon}, {"seed", cfg.seed},
                   {"m", cfg.m},       {"w", cfg.w}};
  doc["satisfied_fraction"] = report.satisfied_fraction;
  json runs = json::array();
  for (const auto& verdict : report.runs) {
    json r = {{"satisfied", verdict.satisfied}, {"accepting_visits", verdict.accepting_visits}};
    if (verdict.violation_step) r["violation_step"] = *verdict.violation_step;
    runs.push_back(r);
  }
  doc["runs"] = runs;
  return doc.dump(2);
}

std::string sim_report_to_csv(const SimReport& report) {
  std::ostringstream out;
  out << "run,satisfied,accepting_visits,violation_step\n";
  for (std::size_t i = 0; i < report.runs.size(); ++i) {
    const auto& verdict = report.runs[i];
    out << i << "," << (verdict.satisfied ? 1 : 0) << "," << verdict.accepting_visits << ",";
    if (verdict.violation_step) out << *verdict.violation_step;
    out << "\n";
  }
  return out.str();
}

std::string trajectory_to_csv(const std::vector<TrajectoryPoint>& points) {
  std::ostringstream out;
  out << "run,step,state,q\n";
  for (const auto& point : points)
    out << point.run << "," << point.step << "," << point.s << "," << point.q << "\n";
  return out.str();
}

}  // namespace mdpst
