#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "averl/averl.hpp"

using averl::AggregateRow;
using averl::CurveRow;
using averl::CurveTable;
using averl::ExperimentConfig;
using averl::Method;
using averl::Rng;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("averl_harness_" + std::to_string(Catch::rngSeed()) + "_" +
            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

// Two-state MDP paying 1 on every transition; experiments on it produce
// constant curves whose aggregates are knowable in the head.
std::string write_constant_mdp(const TempDir& tmp) {
  averl::Mdp m(2, 2);
  m.add_transition(0, 0, 1, 1.0, 1.0);
  m.add_transition(0, 1, 0, 1.0, 1.0);
  m.add_transition(1, 0, 0, 1.0, 1.0);
  m.add_transition(1, 1, 1, 1.0, 1.0);
  const std::string path = tmp.file("const.json");
  averl::save_mdp(m, path);
  return path;
}

}  // namespace

TEST_CASE("experiment config round-trips through its one-line JSON") {
  ExperimentConfig cfg;
  cfg.env = "cartpole";
  cfg.methods = {Method::Shielding, Method::Baseline};
  cfg.total_steps = 4000;
  cfg.window = 200;
  cfg.seeds = 3;
  cfg.seed_base = 17;
  cfg.learner.alpha = 0.25;
  cfg.learner.beta = 0.005;
  cfg.learner.decay_rates = true;
  cfg.learner.decay_exponent = 0.7;
  cfg.learner.exploration.kind = averl::ExplorationSchedule::Kind::Softmax;
  cfg.learner.exploration.tau0 = 2.0;
  cfg.learner.exploration.tau_min = 0.05;
  cfg.learner.rho_mode = averl::RhoMode::SingleScalar;
  cfg.advice_variant = "inaccurate";
  cfg.layout_file = "floor.txt";

  std::string text = averl::experiment_config_to_text(cfg);
  ExperimentConfig back = averl::experiment_config_from_text(text);
  REQUIRE(averl::experiment_config_to_text(back) == text);
  REQUIRE(back.env == cfg.env);
  REQUIRE(back.methods == cfg.methods);
  REQUIRE(back.total_steps == cfg.total_steps);
  REQUIRE(back.resolved_window() == 200);
  REQUIRE(back.seeds == 3);
  REQUIRE(back.seed_base == 17);
  REQUIRE(back.learner.alpha == 0.25);
  REQUIRE(back.learner.beta == 0.005);
  REQUIRE(back.learner.decay_rates);
  REQUIRE(back.learner.decay_exponent == 0.7);
  REQUIRE(back.learner.exploration.kind == averl::ExplorationSchedule::Kind::Softmax);
  REQUIRE(back.learner.exploration.tau0 == 2.0);
  REQUIRE(back.learner.exploration.tau_min == 0.05);
  REQUIRE(back.learner.rho_mode == averl::RhoMode::SingleScalar);
  REQUIRE(back.advice_variant == "inaccurate");
  REQUIRE(back.layout_file == "floor.txt");

  // The epsilon-greedy branch also survives a round trip.
  ExperimentConfig eps;
  eps.learner.exploration.kind = averl::ExplorationSchedule::Kind::EpsilonGreedy;
  eps.learner.exploration.eps0 = 0.4;
  std::string etext = averl::experiment_config_to_text(eps);
  REQUIRE(averl::experiment_config_from_text(etext).learner.exploration.eps0 == 0.4);
  REQUIRE(averl::experiment_config_to_text(averl::experiment_config_from_text(etext)) ==
          etext);

  // Omitted keys keep their defaults.
  ExperimentConfig sparse = averl::experiment_config_from_text(R"({"env": "gridworld"})");
  REQUIRE(sparse.methods.size() == 3);
  REQUIRE(sparse.total_steps == 10000);
  REQUIRE(sparse.window == 0);
  REQUIRE(sparse.resolved_window() == averl::default_window("gridworld"));

  REQUIRE_THROWS_AS(averl::experiment_config_from_text("nope"), averl::ParseError);
  REQUIRE_THROWS_AS(averl::experiment_config_from_text(
                        R"({"env": "x", "exploration": {"kind": "thompson"}})"),
                    averl::ParseError);
  REQUIRE_THROWS_AS(
      averl::experiment_config_from_text(R"({"env": "x", "rho_mode": "global"})"),
      averl::ParseError);
}

TEST_CASE("experiment validation rejects bad setups") {
  ExperimentConfig cfg;
  cfg.env = "gridworld";
  cfg.total_steps = 1000;
  cfg.window = 300;  // does not divide
  REQUIRE_THROWS_AS(cfg.check(), averl::ConfigError);
  cfg.window = 250;
  REQUIRE_NOTHROW(cfg.check());

  cfg.seeds = 0;
  REQUIRE_THROWS_AS(cfg.check(), averl::ConfigError);
  cfg.seeds = 1;

  cfg.methods.clear();
  REQUIRE_THROWS_AS(cfg.check(), averl::ConfigError);
  cfg.methods = {Method::Baseline};

  cfg.advice_variant = "sloppy";
  REQUIRE_THROWS_AS(cfg.check(), averl::ConfigError);
  cfg.advice_variant = "accurate";

  cfg.learner.alpha = 0.0;
  REQUIRE_THROWS_AS(cfg.check(), averl::ConfigError);
}

TEST_CASE("aggregates are order-independent and match hand values") {
  std::vector<CurveRow> rows = {
      {Method::Shaping, 7, 100, 1.0},  {Method::Shaping, 8, 100, 2.0},
      {Method::Shaping, 9, 100, 3.0},  {Method::Baseline, 7, 100, 5.0},
      {Method::Baseline, 8, 100, 5.0}, {Method::Shaping, 7, 200, -1.0},
      {Method::Shaping, 8, 200, 1.0},  {Method::Shaping, 9, 200, 0.0},
  };
  std::vector<AggregateRow> agg = averl::compute_aggregates(rows);
  REQUIRE(agg.size() == 3);
  // Canonical order: method enum, then step.
  REQUIRE(agg[0].method == Method::Baseline);
  REQUIRE(agg[0].step == 100);
  REQUIRE(agg[0].mean == 5.0);
  REQUIRE(agg[0].stddev == 0.0);
  REQUIRE(agg[1].method == Method::Shaping);
  REQUIRE(agg[1].step == 100);
  REQUIRE(agg[1].mean == 2.0);
  REQUIRE(agg[1].stddev == 1.0);  // sample stddev of {1,2,3}
  REQUIRE(agg[2].step == 200);
  REQUIRE(agg[2].mean == 0.0);
  REQUIRE(agg[2].stddev == 1.0);

  // Any arrival order produces bitwise identical aggregates.
  Rng rng(13);
  std::vector<CurveRow> shuffled = rows;
  for (int trial = 0; trial < 20; ++trial) {
    for (std::size_t i = shuffled.size(); i > 1; --i)
      std::swap(shuffled[i - 1], shuffled[rng.uniform_int(static_cast<int>(i))]);
    std::vector<AggregateRow> again = averl::compute_aggregates(shuffled);
    REQUIRE(again.size() == agg.size());
    for (std::size_t k = 0; k < agg.size(); ++k) {
      REQUIRE(again[k].method == agg[k].method);
      REQUIRE(again[k].step == agg[k].step);
      REQUIRE(again[k].mean == agg[k].mean);
      REQUIRE(again[k].stddev == agg[k].stddev);
    }
  }
}

TEST_CASE("a constant-reward experiment runs, saves, and reloads exactly") {
  TempDir tmp;
  ExperimentConfig cfg;
  cfg.env = "mdp:" + write_constant_mdp(tmp);
  cfg.methods = {Method::Baseline};
  cfg.total_steps = 2000;
  cfg.window = 100;
  cfg.seeds = 3;
  cfg.seed_base = 5;

  CurveTable table = averl::run_experiment(cfg);
  REQUIRE(table.rows.size() == 3 * 20);
  for (const auto& r : table.rows) {
    REQUIRE(r.method == Method::Baseline);
    REQUIRE(r.value == 1.0);
    REQUIRE(r.step % 100 == 0);
    REQUIRE(r.seed >= 5);
    REQUIRE(r.seed <= 7);
  }
  REQUIRE(table.aggregates.size() == 20);
  for (const auto& a : table.aggregates) {
    REQUIRE(a.mean == 1.0);
    REQUIRE(a.stddev == 0.0);
  }
  REQUIRE(averl::final_step(table) == 2000);
  REQUIRE(averl::values_at(table, Method::Baseline, 2000).size() == 3);

  // Same config, same bytes.
  CurveTable again = averl::run_experiment(cfg);
  REQUIRE(averl::curve_csv_text(again) == averl::curve_csv_text(table));

  // CSV round trip preserves rows and reproduces aggregates bit for bit.
  std::string csv = averl::curve_csv_text(table);
  CurveTable parsed = averl::parse_curve_csv(csv);
  REQUIRE(parsed.config_text == table.config_text);
  REQUIRE(parsed.rows.size() == table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    REQUIRE(parsed.rows[i].method == table.rows[i].method);
    REQUIRE(parsed.rows[i].seed == table.rows[i].seed);
    REQUIRE(parsed.rows[i].step == table.rows[i].step);
    REQUIRE(parsed.rows[i].value == table.rows[i].value);
  }
  REQUIRE(parsed.aggregates.size() == table.aggregates.size());
  for (std::size_t i = 0; i < table.aggregates.size(); ++i) {
    REQUIRE(parsed.aggregates[i].mean == table.aggregates[i].mean);
    REQUIRE(parsed.aggregates[i].stddev == table.aggregates[i].stddev);
  }
  REQUIRE(averl::aggregate_csv_text(parsed) == averl::aggregate_csv_text(table));

  // save_curves writes both artifacts; load_curves verifies the manifest.
  averl::save_curves(table, tmp.file("curves.csv"), tmp.file("agg.csv"));
  REQUIRE(averl::read_file(tmp.file("curves.csv")) == csv);
  REQUIRE(averl::load_curves(tmp.file("curves.csv")).rows.size() == table.rows.size());
  REQUIRE(averl::read_file(tmp.file("agg.csv")) == averl::aggregate_csv_text(table));

  // Any payload tampering trips the embedded hash.
  std::string tampered = csv;
  std::string::size_type pos = tampered.rfind(",1\n");
  REQUIRE(pos != std::string::npos);
  tampered.replace(pos, 3, ",2\n");
  REQUIRE_THROWS_WITH(averl::parse_curve_csv(tampered),
                      Catch::Matchers::ContainsSubstring("hash mismatch"));

  // A file without the hash comment still parses (hand-built tables).
  std::string no_hash;
  std::istringstream lines(csv);
  for (std::string line; std::getline(lines, line);)
    if (line.rfind("# hash ", 0) != 0) no_hash += line + "\n";
  REQUIRE(averl::parse_curve_csv(no_hash).rows.size() == table.rows.size());
}

TEST_CASE("experiment rows match direct training runs cell by cell") {
  ExperimentConfig cfg;
  cfg.env = "gridworld";
  cfg.methods = {Method::Baseline, Method::Shaping};
  cfg.total_steps = 3000;
  cfg.window = 300;
  cfg.seeds = 2;
  cfg.seed_base = 11;
  CurveTable table = averl::run_experiment(cfg);
  REQUIRE(table.rows.size() == 2 * 2 * 10);

  auto probe = averl::make_env("gridworld", cfg.seed_base);
  averl::SynthesizedAdvice adv = averl::synthesize_advice(*probe, "gridworld");
  for (Method method : cfg.methods) {
    for (int i = 0; i < cfg.seeds; ++i) {
      const std::uint64_t run_seed = cfg.seed_base + static_cast<std::uint64_t>(i);
      auto env = averl::make_env("gridworld", run_seed);
      averl::LearnerConfig lc = cfg.learner;
      lc.seed = run_seed;
      averl::RunResult rr = averl::run_training(
          *env, lc, method == Method::Shaping ? &adv.potential : nullptr, nullptr,
          cfg.total_steps, cfg.window);
      for (std::size_t w = 0; w < rr.window_avg_reward.size(); ++w) {
        std::uint64_t step = static_cast<std::uint64_t>(w + 1) * cfg.window;
        double expect = averl::quantize_sig(rr.window_avg_reward[w], 12);
        bool found = false;
        for (const auto& r : table.rows)
          if (r.method == method && r.seed == run_seed && r.step == step) {
            REQUIRE(r.value == expect);
            found = true;
          }
        REQUIRE(found);
      }
    }
  }

  // Row shuffling never changes the published aggregates.
  std::vector<CurveRow> shuffled = table.rows;
  std::reverse(shuffled.begin(), shuffled.end());
  std::vector<AggregateRow> again = averl::compute_aggregates(shuffled);
  REQUIRE(again.size() == table.aggregates.size());
  for (std::size_t k = 0; k < again.size(); ++k) {
    REQUIRE(again[k].mean == table.aggregates[k].mean);
    REQUIRE(again[k].stddev == table.aggregates[k].stddev);
  }
}

TEST_CASE("method comparison pulls the right samples and needs two seeds") {
  CurveTable table;
  table.rows = {
      {Method::Baseline, 0, 100, 1.0}, {Method::Baseline, 1, 100, 2.0},
      {Method::Baseline, 2, 100, 3.0}, {Method::Shaping, 0, 100, 2.0},
      {Method::Shaping, 1, 100, 4.0},  {Method::Shaping, 2, 100, 6.0},
      {Method::Baseline, 0, 200, 9.0},
  };
  averl::WelchResult got = averl::compare_methods(table, 100, Method::Baseline,
                                                  Method::Shaping);
  averl::WelchResult direct = averl::welch_compare({1.0, 2.0, 3.0}, {2.0, 4.0, 6.0}, 0.95);
  REQUIRE(got.mean_a == direct.mean_a);
  REQUIRE(got.mean_b == direct.mean_b);
  REQUIRE(got.mean_diff == direct.mean_diff);
  REQUIRE(got.t_stat == direct.t_stat);
  REQUIRE(got.dof == direct.dof);
  REQUIRE(got.p_value == direct.p_value);
  REQUIRE(got.mean_a == 2.0);
  REQUIRE(got.mean_b == 4.0);
  REQUIRE(got.mean_diff == -2.0);

  // Only one sample of each method exists at step 200.
  REQUIRE_THROWS_AS(averl::compare_methods(table, 200, Method::Baseline, Method::Shaping),
                    averl::InsufficientSeedsError);
}

TEST_CASE("plots carry their aggregates and a verifiable manifest") {
  ExperimentConfig cfg;
  cfg.env = "gridworld";
  cfg.methods = {Method::Baseline, Method::Shaping};
  cfg.total_steps = 2000;
  cfg.window = 500;
  cfg.seeds = 2;
  cfg.seed_base = 3;
  CurveTable table = averl::run_experiment(cfg);

  std::string svg = averl::plot_svg_text(table);
  REQUIRE(svg.rfind("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"900\" "
                    "height=\"560\"",
                    0) == 0);
  REQUIRE(svg.find("<!-- config " + table.config_text + " -->\n") != std::string::npos);
  REQUIRE(svg.find("nan") == std::string::npos);
  REQUIRE(svg.find(">Number of Steps</text>") != std::string::npos);
  REQUIRE(svg.find(">Average Reward</text>") != std::string::npos);
  REQUIRE(svg.find(">Baseline</text>") != std::string::npos);
  REQUIRE(svg.find(">Shaping</text>") != std::string::npos);

  // One band and one mean line per method.
  std::size_t bands = 0, means = 0;
  for (std::size_t p = svg.find("fill-opacity=\"0.15\""); p != std::string::npos;
       p = svg.find("fill-opacity=\"0.15\"", p + 1))
    ++bands;
  for (std::size_t p = svg.find("class=\"mean\""); p != std::string::npos;
       p = svg.find("class=\"mean\"", p + 1))
    ++means;
  REQUIRE(bands == 2);
  REQUIRE(means == 2);

  // The data-points attribute replays the aggregate table exactly.
  for (Method m : cfg.methods) {
    std::string expect = "data-method=\"" + std::string(averl::method_name(m)) +
                         "\" data-points=\"";
    bool first = true;
    for (const auto& a : table.aggregates)
      if (a.method == m) {
        expect += (first ? "" : ";") + std::to_string(a.step) + ":" +
                  averl::fmt_sig(a.mean, 12);
        first = false;
      }
    expect += "\"";
    REQUIRE(svg.find(expect) != std::string::npos);
  }

  // The hash comment binds the config to everything after it.
  std::string::size_type hpos = svg.find("<!-- hash ");
  REQUIRE(hpos != std::string::npos);
  std::string::size_type hend = svg.find(" -->\n", hpos);
  std::string hash = svg.substr(hpos + 10, hend - hpos - 10);
  std::string payload = svg.substr(hend + 5);
  REQUIRE(hash == averl::manifest_hash(table.config_text, payload));

  TempDir tmp;
  averl::emit_plot(table, tmp.file("plot.svg"));
  REQUIRE(averl::read_file(tmp.file("plot.svg")) == svg);

  REQUIRE_THROWS_AS(averl::plot_svg_text(CurveTable{}), averl::ConfigError);

  // Flat curves (zero variance everywhere) still produce finite coordinates.
  TempDir tmp2;
  ExperimentConfig flat;
  flat.env = "mdp:" + write_constant_mdp(tmp2);
  flat.methods = {Method::Baseline};
  flat.total_steps = 300;
  flat.window = 100;
  flat.seeds = 2;
  std::string flat_svg = averl::plot_svg_text(averl::run_experiment(flat));
  REQUIRE(flat_svg.find("nan") == std::string::npos);
  REQUIRE(flat_svg.find("class=\"mean\"") != std::string::npos);
}
