// Command-line front end: potential synthesis from explicit models, training
// runs on the benchmark environments, config-driven experiments, statistical
// comparison, and plot emission.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "averl/averl.hpp"

namespace {

averl::DistanceSpec parse_distance_flag(const std::string& text) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text + ":") {
    if (c == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  auto num = [&](const std::string& s, const char* what) {
    try {
      std::size_t pos = 0;
      double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw averl::ConfigError(std::string("bad ") + what + " in --distance: '" + s + "'");
    }
  };
  if (parts.empty()) throw averl::ConfigError("empty --distance spec");
  const std::string& kind = parts[0];
  if (kind == "constant") {
    if (parts.size() != 2) throw averl::ConfigError("--distance constant:VALUE");
    return averl::DistanceSpec::constant(num(parts[1], "value"));
  }
  if (kind == "region") {
    if (parts.size() < 2 || parts.size() > 3)
      throw averl::ConfigError("--distance region:SCALE[:BONUS]");
    return averl::DistanceSpec::manhattan_to_region(
        num(parts[1], "scale"), parts.size() == 3 ? num(parts[2], "bonus") : 0.0);
  }
  if (kind == "target") {
    if (parts.size() < 3 || parts.size() > 4)
      throw averl::ConfigError("--distance target:LABEL:SCALE[:BONUS]");
    return averl::DistanceSpec::manhattan_to_target(
        parts[1], num(parts[2], "scale"), parts.size() == 4 ? num(parts[3], "bonus") : 0.0);
  }
  throw averl::ConfigError("unknown --distance kind '" + kind +
                           "' (expected constant|region|target)");
}

std::string seed_suffixed(const std::string& path, int seed_index) {
  auto dot = path.find_last_of('.');
  auto slash = path.find_last_of('/');
  std::string tag = ".seed" + std::to_string(seed_index);
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return path + tag;
  return path.substr(0, dot) + tag + path.substr(dot);
}

int run_synth(const std::string& mdp_file, const std::string& formula,
              const std::string& dfa_file, double c, const std::string& distance,
              const std::string& out) {
  averl::Mdp m = averl::load_mdp(mdp_file);
  averl::DistanceSpec spec = parse_distance_flag(distance);
  averl::MdpAdviceResult result;
  if (!formula.empty()) {
    result = averl::synthesize_from_formula(m, formula, c, spec);
  } else {
    averl::SafetyAutomaton aut = averl::load_dfa(dfa_file);
    result = averl::synthesize_from_automaton(m, aut, c, spec);
  }
  averl::save_potential(result.potential, out);
  std::printf("states=%d actions=%d region_pairs=%lld clamped=%d%s\n", m.num_states(),
              m.num_actions(), result.region.count(), result.potential.clamped_count,
              result.potential.empty_region ? " (empty region)" : "");
  return 0;
}

int run_train(const averl::ExperimentConfig& cfg, const std::string& out) {
  cfg.check();
  const int window = cfg.resolved_window();
  const std::string layout_text =
      cfg.layout_file.empty() ? std::string() : averl::read_file(cfg.layout_file);
  const averl::Method method = cfg.methods.at(0);

  averl::SynthesizedAdvice advice;
  if (method != averl::Method::Baseline) {
    auto probe = averl::make_env(cfg.env, cfg.seed_base, layout_text);
    advice = averl::synthesize_advice(*probe, cfg.advice_env_name());
  }
  for (int i = 0; i < cfg.seeds; ++i) {
    const std::uint64_t run_seed = cfg.seed_base + static_cast<std::uint64_t>(i);
    auto env = averl::make_env(cfg.env, run_seed, layout_text);
    averl::LearnerConfig lc = cfg.learner;
    lc.seed = run_seed;
    const averl::PotentialTable* phi =
        method == averl::Method::Shaping ? &advice.potential : nullptr;
    const averl::ShieldMask* shield =
        method == averl::Method::Shielding ? &advice.shield : nullptr;
    averl::RunResult rr =
        averl::run_training(*env, lc, phi, shield, cfg.total_steps, window);
    if (!out.empty()) {
      std::string path = cfg.seeds == 1 ? out : seed_suffixed(out, i);
      averl::save_learner(rr.final_state, averl::method_name(method), path);
    }
    std::printf("seed=%llu final_window_avg=%s\n",
                static_cast<unsigned long long>(run_seed),
                averl::fmt_sig(rr.window_avg_reward.back(), 12).c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Average-reward RL with temporal-logic reward shaping"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Synthesize a potential table from an MDP "
                                            "and safety advice");
  std::string synth_mdp, synth_formula, synth_dfa, synth_out;
  std::string synth_distance = "constant:-1";
  double synth_c = 1.0;
  synth->add_option("--mdp", synth_mdp, "MDP file (JSON)")->required();
  auto* adv_opt = synth->add_option("--advice", synth_formula,
                                    "Invariant formula, e.g. 'G kitchen'");
  auto* dfa_opt = synth->add_option("--dfa", synth_dfa, "Safety DFA file (JSON)");
  adv_opt->excludes(dfa_opt);
  synth->add_option("--C", synth_c, "Potential value on the winning region");
  synth->add_option("--distance", synth_distance,
                    "d(s,a) outside the region: constant:VALUE | region:SCALE[:BONUS] | "
                    "target:LABEL:SCALE[:BONUS]");
  synth->add_option("--out", synth_out, "Output potential file")->required();

  // train
  auto* train = app.add_subcommand("train", "Train a tabular R-learner on a benchmark "
                                            "environment");
  averl::ExperimentConfig tcfg;
  std::string train_method = "baseline", train_out, train_exploration = "softmax";
  tcfg.seeds = 1;
  train->add_option("--env", tcfg.env, "Environment name")->required();
  train->add_option("--method", train_method, "baseline | shaping | shielding");
  train->add_option("--steps", tcfg.total_steps, "Total environment steps");
  train->add_option("--seeds", tcfg.seeds, "Number of runs (seeds seed_base..)");
  train->add_option("--seed-base", tcfg.seed_base, "First seed");
  train->add_option("--alpha", tcfg.learner.alpha, "Q step size");
  train->add_option("--beta", tcfg.learner.beta, "Gain step size");
  train->add_option("--tau0", tcfg.learner.exploration.tau0, "Initial softmax temperature");
  train->add_option("--tau-min", tcfg.learner.exploration.tau_min,
                    "Final softmax temperature");
  train->add_option("--eps0", tcfg.learner.exploration.eps0, "Initial epsilon");
  train->add_option("--eps-min", tcfg.learner.exploration.eps_min, "Final epsilon");
  train->add_option("--exploration", train_exploration, "softmax | epsilon_greedy");
  train->add_flag("--decay-rates", tcfg.learner.decay_rates,
                  "Shrink step sizes with visit counts");
  train->add_option("--window", tcfg.window, "Reporting window (0 = env default)");
  train->add_option("--advice-variant", tcfg.advice_variant, "accurate | inaccurate");
  train->add_option("--layout", tcfg.layout_file, "Sweeping layout file override");
  train->add_option("--out", train_out, "Q-table output file (per-seed suffix when "
                                        "--seeds > 1)");

  // experiment
  auto* experiment = app.add_subcommand("experiment", "Run a config-driven multi-seed "
                                                      "experiment");
  std::string exp_config;
  experiment->add_option("--config", exp_config, "Experiment config file (JSON)")
      ->required();

  // compare
  auto* compare = app.add_subcommand("compare", "Welch comparison of two methods at a "
                                                "step");
  std::string cmp_in, cmp_a = "shaping", cmp_b = "baseline";
  std::uint64_t cmp_step = 0;
  compare->add_option("--in", cmp_in, "Curve CSV file")->required();
  compare->add_option("--step", cmp_step, "Step (0 = final step)");
  compare->add_option("--a", cmp_a, "First method");
  compare->add_option("--b", cmp_b, "Second method");

  // plot
  auto* plot = app.add_subcommand("plot", "Render a curve CSV as an SVG learning plot");
  std::string plot_in, plot_out;
  plot->add_option("--in", plot_in, "Curve CSV file")->required();
  plot->add_option("--out", plot_out, "Output SVG file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      if (synth_formula.empty() && synth_dfa.empty())
        throw averl::ConfigError("synth needs --advice FORMULA or --dfa FILE");
      return run_synth(synth_mdp, synth_formula, synth_dfa, synth_c, synth_distance,
                       synth_out);
    }
    if (train->parsed()) {
      tcfg.methods = {averl::method_from_name(train_method)};
      if (train_exploration == "softmax")
        tcfg.learner.exploration.kind = averl::ExplorationSchedule::Kind::Softmax;
      else if (train_exploration == "epsilon_greedy")
        tcfg.learner.exploration.kind = averl::ExplorationSchedule::Kind::EpsilonGreedy;
      else
        throw averl::ConfigError("unknown --exploration '" + train_exploration + "'");
      return run_train(tcfg, train_out);
    }
    if (experiment->parsed()) {
      averl::ExperimentConfig cfg =
          averl::experiment_config_from_text(averl::read_file(exp_config), exp_config);
      averl::CurveTable table = averl::run_experiment(cfg);
      averl::save_curves(table, cfg.out_csv, cfg.out_aggregate);
      if (!cfg.out_plot.empty()) averl::emit_plot(table, cfg.out_plot);
      std::printf("rows=%zu aggregates=%zu\n", table.rows.size(), table.aggregates.size());
      return 0;
    }
    if (compare->parsed()) {
      averl::CurveTable table = averl::load_curves(cmp_in);
      std::uint64_t step = cmp_step > 0 ? cmp_step : averl::final_step(table);
      averl::WelchResult r = averl::compare_methods(
          table, step, averl::method_from_name(cmp_a), averl::method_from_name(cmp_b));
      std::printf("step=%llu mean_%s=%s mean_%s=%s diff=%s ci95=[%s,%s] t=%s dof=%s p=%s\n",
                  static_cast<unsigned long long>(step), cmp_a.c_str(),
                  averl::fmt_sig(r.mean_a, 12).c_str(), cmp_b.c_str(),
                  averl::fmt_sig(r.mean_b, 12).c_str(),
                  averl::fmt_sig(r.mean_diff, 12).c_str(),
                  averl::fmt_sig(r.ci_lo, 12).c_str(), averl::fmt_sig(r.ci_hi, 12).c_str(),
                  averl::fmt_sig(r.t_stat, 12).c_str(), averl::fmt_sig(r.dof, 12).c_str(),
                  averl::fmt_sig(r.p_value, 12).c_str());
      return 0;
    }
    if (plot->parsed()) {
      averl::CurveTable table = averl::load_curves(plot_in);
      averl::emit_plot(table, plot_out);
      std::printf("wrote %s\n", plot_out.c_str());
      return 0;
    }
  } catch (const averl::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
