#include "mdpst/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "mdpst/hexworld.hpp"
#include "mdpst/montecarlo.hpp"
#include "mdpst/oracle.hpp"
#include "mdpst/product.hpp"
#include "mdpst/synthesis.hpp"
#include "mdpst/winning_region.hpp"

namespace mdpst {

using nlohmann::json;

namespace {

// Fixed float formatting (12 significant digits) for byte-identical outputs.
json canonical(const json& value) {
  switch (value.type()) {
    case json::value_t::number_float: {
      char buffer[64];
      std::snprintf(buffer, sizeof(buffer), "%.12g", value.get<double>());
      return json::parse(buffer);
    }
    case json::value_t::object: {
      json out = json::object();
      for (const auto& [key, item] : value.items()) out[key] = canonical(item);
      return out;
    }
    case json::value_t::array: {
      json out = json::array();
      for (const auto& item : value) out.push_back(canonical(item));
      return out;
    }
    default:
      return value;
  }
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

void write_canonical_json(const std::string& path, const std::string& text) {
  write_file(path, canonical(json::parse(text)).dump(2) + "\n");
}

ProductMdpst build_any_product(const MdpstModel& model, const Automaton& aut) {
  return std::holds_alternative<Ldba>(aut) ? build_product(model, std::get<Ldba>(aut))
                                           : build_product_dra(model, std::get<Dra>(aut));
}

}  // namespace

int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"Strategy synthesis for MDPSTs under LTL objectives"};
  app.require_subcommand(1);

  // validate
  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Check a model file");
  validate_cmd->add_option("model", validate_path, "model JSON")->required();

  // product
  std::string prod_model, prod_aut, prod_out, prod_dot;
  auto* product_cmd = app.add_subcommand("product", "Build a product");
  product_cmd->add_option("--model", prod_model)->required();
  product_cmd->add_option("--automaton", prod_aut)->required();
  product_cmd->add_option("-o,--output", prod_out)->required();
  product_cmd->add_option("--dot", prod_dot, "also write a DOT rendering");

  // wr
  std::string wr_product, wr_out, wr_classifier = "qualitative";
  double wr_theta = 1e-3, wr_kappa = 1e-2;
  auto* wr_cmd = app.add_subcommand("wr", "Compute the winning region");
  wr_cmd->add_option("--product", wr_product)->required();
  wr_cmd->add_option("-o,--output", wr_out)->required();
  wr_cmd->add_option("--classifier", wr_classifier)->check(CLI::IsMember({"qualitative", "numeric"}));
  wr_cmd->add_option("--theta", wr_theta);
  wr_cmd->add_option("--kappa", wr_kappa);

  // synth
  std::string synth_model, synth_aut, synth_out, synth_report;
  double synth_theta = 1e-3;
  bool synth_rr = false;
  auto* synth_cmd = app.add_subcommand("synth", "Synthesize a strategy");
  synth_cmd->add_option("--model", synth_model)->required();
  synth_cmd->add_option("--automaton", synth_aut)->required();
  synth_cmd->add_option("-o,--output", synth_out)->required();
  synth_cmd->add_option("--report", synth_report);
  synth_cmd->add_option("--theta", synth_theta);
  synth_cmd->add_flag("--round-robin", synth_rr, "cycle through accepting states inside the region");

  // hexworld
  int hex_nx = 0, hex_ny = 0;
  std::string hex_layout, hex_out;
  auto* hex_cmd = app.add_subcommand("hexworld", "Generate a hexworld benchmark");
  hex_cmd->add_option("--nx", hex_nx)->required();
  hex_cmd->add_option("--ny", hex_ny)->required();
  hex_cmd->add_option("--layout", hex_layout, "layout JSON (default layout otherwise)");
  hex_cmd->add_option("-o,--output", hex_out)->required();

  // simulate
  std::string sim_model, sim_aut, sim_strategy, sim_out, sim_nature = "random", sim_traj;
  SimConfig sim_cfg;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo rollouts of a strategy");
  sim_cmd->add_option("--model", sim_model)->required();
  sim_cmd->add_option("--automaton", sim_aut)->required();
  sim_cmd->add_option("--strategy", sim_strategy)->required();
  sim_cmd->add_option("--runs", sim_cfg.runs);
  sim_cmd->add_option("--steps", sim_cfg.horizon);
  sim_cmd->add_option("--seed", sim_cfg.seed);
  sim_cmd->add_option("--nature", sim_nature)->check(CLI::IsMember({"random", "adversarial"}));
  sim_cmd->add_option("-o,--output", sim_out)->required();
  sim_cmd->add_option("--csv", sim_traj, "also write per-run CSV");
  std::string sim_traj_csv;
  sim_cmd->add_option("--trajectory", sim_traj_csv, "dump (run, step, cell, q) CSV");

  // oracle
  std::string oracle_product, oracle_objective = "buchi";
  std::vector<StateIndex> oracle_targets;
  auto* oracle_cmd = app.add_subcommand("oracle", "Brute-force value for small products");
  oracle_cmd->add_option("--product", oracle_product)->required();
  oracle_cmd->add_option("--objective", oracle_objective)->check(CLI::IsMember({"buchi", "reach"}));
  oracle_cmd->add_option("--targets", oracle_targets, "target states for reach");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*validate_cmd) {
      auto model = load_model_file(validate_path);
      std::cout << "ok: " << model.num_states() << " states, " << model.num_actions()
                << " actions\n";
      return 0;
    }
    if (*product_cmd) {
      auto model = load_model_file(prod_model);
      auto aut = load_automaton_file(prod_aut);
      auto p = build_any_product(model, aut);
      write_canonical_json(prod_out, product_to_json(p));
      if (!prod_dot.empty()) write_file(prod_dot, product_to_dot(p));
      std::cout << "product states: " << p.model.num_states()
                << ", edges: " << product_edge_count(p) << "\n";
      return 0;
    }
    if (*wr_cmd) {
      auto p = load_product_file(wr_product);
      WrOptions opts;
      opts.theta = wr_theta;
      opts.kappa = wr_kappa;
      opts.classifier =
          wr_classifier == "numeric" ? Classifier::Numeric : Classifier::Qualitative;
      auto region = p.pairs.empty() ? compute_winning_region(p, opts)
                                    : winning_region_rabin(p, opts);
      write_canonical_json(wr_out, winning_region_to_json(region));
      std::cout << "winning region: " << region.states.size() << " states\n";
      return 0;
    }
    if (*synth_cmd) {
      auto model = load_model_file(synth_model);
      auto aut = load_automaton_file(synth_aut);
      SolveOptions opts;
      opts.theta = synth_theta;
      opts.round_robin = synth_rr;
      auto sol = solve(model, aut, opts);
      write_canonical_json(synth_out, strategy_to_json(sol.strategy));
      if (!synth_report.empty()) write_canonical_json(synth_report, report_to_json(sol.report));
      std::cout << "value: " << sol.report.value << ", winning region: " << sol.report.wr_size
                << " of " << sol.report.product_states << " product states\n";
      return 0;
    }
    if (*hex_cmd) {
      HexConfig cfg;
      cfg.layout = hex_layout.empty() ? default_layout(hex_nx, hex_ny) : load_layout_file(hex_layout);
      auto model = generate_hexworld(cfg);
      write_canonical_json(hex_out, model_to_json(model));
      std::cout << "hexworld: " << model.num_states() << " states\n";
      return 0;
    }
    if (*sim_cmd) {
      auto model = load_model_file(sim_model);
      auto aut = load_automaton_file(sim_aut);
      auto strategy = load_strategy_json([&] {
        std::ifstream in(sim_strategy);
        if (!in) throw std::runtime_error("cannot open strategy file: " + sim_strategy);
        return std::string(std::istreambuf_iterator<char>(in), {});
      }());
      auto p = build_any_product(model, aut);
      NatureSpec nature;
      if (sim_nature == "adversarial") {
        // The worst positional nature falls out of the value function.
        auto sol = solve(model, aut);
        nature = adversarial_nature(p, sol.product_strategy.values);
      }
      std::vector<TrajectoryPoint> trajectory;
      auto report = simulate(p, strategy, nature, sim_cfg,
                             sim_traj_csv.empty() ? nullptr : &trajectory);
      write_canonical_json(sim_out, sim_report_to_json(report, sim_cfg));
      if (!sim_traj.empty()) write_file(sim_traj, sim_report_to_csv(report));
      if (!sim_traj_csv.empty()) write_file(sim_traj_csv, trajectory_to_csv(trajectory));
      std::cout << "satisfied fraction: " << report.satisfied_fraction << "\n";
      return 0;
    }
    if (*oracle_cmd) {
      auto p = load_product_file(oracle_product);
      double value = 0.0;
      if (oracle_objective == "reach") {
        if (oracle_targets.empty()) throw std::runtime_error("oracle reach: --targets required");
        value = brute_force_value(p, Objective::Reach,
                                  std::set<StateIndex>(oracle_targets.begin(), oracle_targets.end()));
      } else {
        auto targets = oracle_targets.empty()
                           ? p.accepting
                           : std::set<StateIndex>(oracle_targets.begin(), oracle_targets.end());
        value = brute_force_value(p, Objective::Buchi, targets);
      }
      char buffer[64];
      std::snprintf(buffer, sizeof(buffer), "%.12g", value);
      std::cout << buffer << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace mdpst
