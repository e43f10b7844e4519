#ifndef AVERL_HARNESS_HPP
#define AVERL_HARNESS_HPP

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "averl/advice.hpp"
#include "averl/common.hpp"
#include "averl/env/factory.hpp"
#include "averl/io.hpp"
#include "averl/learn.hpp"
#include "averl/stats.hpp"

namespace averl {

// ---------------------------------------------------------------------------
// Experiment configuration.
// ---------------------------------------------------------------------------

struct ExperimentConfig {
  std::string env = "gridworld";
  std::vector<Method> methods = {Method::Baseline, Method::Shaping, Method::Shielding};
  std::uint64_t total_steps = 10000;
  int window = 0;  // 0 means the env's published default
  int seeds = 20;
  std::uint64_t seed_base = 0;
  LearnerConfig learner;
  std::string advice_variant = "accurate";  // accurate | inaccurate
  std::string layout_file;                  // optional sweeping layout override
  std::string out_csv;
  std::string out_aggregate;
  std::string out_plot;

  int resolved_window() const { return window > 0 ? window : default_window(env); }

  void check() const {
    learner.check();
    if (methods.empty()) throw ConfigError("experiment needs at least one method");
    if (seeds < 1) throw ConfigError("experiment needs seeds >= 1");
    int w = resolved_window();
    if (w < 1 || total_steps % static_cast<std::uint64_t>(w) != 0)
      throw ConfigError("window must divide total_steps");
    if (advice_variant != "accurate" && advice_variant != "inaccurate")
      throw ConfigError("advice_variant must be accurate or inaccurate");
  }

  // The advice key: the cart-pole inaccurate package is selected either by env
  // name or by the variant switch; the sweeping and gridworld scenarios encode
  // imperfect advice in the env itself.
  std::string advice_env_name() const {
    if (env == "cartpole" && advice_variant == "inaccurate") return "cartpole-inaccurate";
    return env;
  }
};

// Canonical one-line JSON of the resolved config; manifests hash this text.
inline std::string experiment_config_to_text(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "{\"env\": " << quoted(cfg.env) << ", \"methods\": [";
  for (std::size_t i = 0; i < cfg.methods.size(); ++i)
    out << (i ? ", " : "") << quoted(method_name(cfg.methods[i]));
  out << "], \"total_steps\": " << cfg.total_steps
      << ", \"window\": " << cfg.resolved_window() << ", \"seeds\": " << cfg.seeds
      << ", \"seed_base\": " << cfg.seed_base << ", \"alpha\": "
      << fmt_sig(cfg.learner.alpha, 12) << ", \"beta\": " << fmt_sig(cfg.learner.beta, 12)
      << ", \"decay_rates\": " << (cfg.learner.decay_rates ? "true" : "false")
      << ", \"decay_exponent\": " << fmt_sig(cfg.learner.decay_exponent, 12)
      << ", \"exploration\": "
      << (cfg.learner.exploration.kind == ExplorationSchedule::Kind::Softmax
              ? "{\"kind\": \"softmax\", \"tau0\": " +
                    fmt_sig(cfg.learner.exploration.tau0, 12) + ", \"tau_min\": " +
                    fmt_sig(cfg.learner.exploration.tau_min, 12) + "}"
              : "{\"kind\": \"epsilon_greedy\", \"eps0\": " +
                    fmt_sig(cfg.learner.exploration.eps0, 12) + ", \"eps_min\": " +
                    fmt_sig(cfg.learner.exploration.eps_min, 12) + "}")
      << ", \"rho_mode\": "
      << quoted(cfg.learner.rho_mode == RhoMode::PerState ? "per_state" : "scalar")
      << ", \"advice_variant\": " << quoted(cfg.advice_variant)
      << ", \"layout_file\": " << quoted(cfg.layout_file) << "}";
  return out.str();
}

inline ExperimentConfig experiment_config_from_text(const std::string& text,
                                                    const std::string& what = "config") {
  using nlohmann::json;
  json j = detail::parse_json(text, what);
  try {
    ExperimentConfig cfg;
    cfg.env = detail::need(j, "env", what).get<std::string>();
    if (j.contains("methods")) {
      cfg.methods.clear();
      for (const auto& m : j["methods"])
        cfg.methods.push_back(method_from_name(m.get<std::string>()));
    }
    if (j.contains("total_steps")) cfg.total_steps = j["total_steps"].get<std::uint64_t>();
    if (j.contains("window")) cfg.window = j["window"].get<int>();
    if (j.contains("seeds")) cfg.seeds = j["seeds"].get<int>();
    if (j.contains("seed_base")) cfg.seed_base = j["seed_base"].get<std::uint64_t>();
    if (j.contains("alpha")) cfg.learner.alpha = j["alpha"].get<double>();
    if (j.contains("beta")) cfg.learner.beta = j["beta"].get<double>();
    if (j.contains("decay_rates")) cfg.learner.decay_rates = j["decay_rates"].get<bool>();
    if (j.contains("decay_exponent"))
      cfg.learner.decay_exponent = j["decay_exponent"].get<double>();
    if (j.contains("exploration")) {
      const auto& e = j["exploration"];
      std::string kind = detail::need(e, "kind", what).get<std::string>();
      if (kind == "softmax") {
        cfg.learner.exploration.kind = ExplorationSchedule::Kind::Softmax;
        if (e.contains("tau0")) cfg.learner.exploration.tau0 = e["tau0"].get<double>();
        if (e.contains("tau_min"))
          cfg.learner.exploration.tau_min = e["tau_min"].get<double>();
      } else if (kind == "epsilon_greedy") {
        cfg.learner.exploration.kind = ExplorationSchedule::Kind::EpsilonGreedy;
        if (e.contains("eps0")) cfg.learner.exploration.eps0 = e["eps0"].get<double>();
        if (e.contains("eps_min"))
          cfg.learner.exploration.eps_min = e["eps_min"].get<double>();
      } else {
        throw ParseError(what + ": unknown exploration kind '" + kind + "'");
      }
    }
    if (j.contains("rho_mode")) {
      std::string mode = j["rho_mode"].get<std::string>();
      if (mode == "per_state") cfg.learner.rho_mode = RhoMode::PerState;
      else if (mode == "scalar") cfg.learner.rho_mode = RhoMode::SingleScalar;
      else throw ParseError(what + ": unknown rho_mode '" + mode + "'");
    }
    if (j.contains("advice_variant"))
      cfg.advice_variant = j["advice_variant"].get<std::string>();
    if (j.contains("layout_file")) cfg.layout_file = j["layout_file"].get<std::string>();
    if (j.contains("out_csv")) cfg.out_csv = j["out_csv"].get<std::string>();
    if (j.contains("out_aggregate")) cfg.out_aggregate = j["out_aggregate"].get<std::string>();
    if (j.contains("out_plot")) cfg.out_plot = j["out_plot"].get<std::string>();
    return cfg;
  } catch (const json::exception& e) {
    throw ParseError(what + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Curve tables.
// ---------------------------------------------------------------------------

struct CurveRow {
  Method method;
  std::uint64_t seed;
  std::uint64_t step;
  double value;  // quantized to the emitted 12 significant digits
};

struct AggregateRow {
  Method method;
  std::uint64_t step;
  double mean;
  double stddev;
};

struct CurveTable {
  std::vector<CurveRow> rows;
  std::vector<AggregateRow> aggregates;
  std::string config_text;  // resolved config the rows were produced under
};

// Mean and stddev per (method, step). Rows are accumulated in (method, step,
// seed) order regardless of how they arrive, so recomputing from a re-parsed
// or seed-permuted table reproduces the same doubles bit for bit.
inline std::vector<AggregateRow> compute_aggregates(std::vector<CurveRow> rows) {
  std::sort(rows.begin(), rows.end(), [](const CurveRow& a, const CurveRow& b) {
    if (a.method != b.method) return static_cast<int>(a.method) < static_cast<int>(b.method);
    if (a.step != b.step) return a.step < b.step;
    return a.seed < b.seed;
  });
  std::vector<AggregateRow> out;
  std::size_t i = 0;
  while (i < rows.size()) {
    Welford w;
    std::size_t j = i;
    while (j < rows.size() && rows[j].method == rows[i].method &&
           rows[j].step == rows[i].step) {
      w.add(rows[j].value);
      ++j;
    }
    out.push_back({rows[i].method, rows[i].step, quantize_sig(w.mean(), 12),
                   quantize_sig(w.stddev(), 12)});
    i = j;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Experiment execution.
// ---------------------------------------------------------------------------

// Trains every (method, seed) cell and collects the raw-reward window means.
// Advice is synthesized once: it depends on the dynamics and the package, not
// on the run seed (construction seeds only move trash frequencies).
inline CurveTable run_experiment(const ExperimentConfig& cfg) {
  cfg.check();
  const int window = cfg.resolved_window();
  const std::string layout_text =
      cfg.layout_file.empty() ? std::string() : read_file(cfg.layout_file);

  bool needs_advice = false;
  for (Method m : cfg.methods)
    if (m != Method::Baseline) needs_advice = true;

  SynthesizedAdvice advice;
  if (needs_advice) {
    auto probe = make_env(cfg.env, cfg.seed_base, layout_text);
    advice = synthesize_advice(*probe, cfg.advice_env_name());
  }

  CurveTable table;
  table.config_text = experiment_config_to_text(cfg);
  for (Method method : cfg.methods) {
    for (int i = 0; i < cfg.seeds; ++i) {
      const std::uint64_t run_seed = cfg.seed_base + static_cast<std::uint64_t>(i);
      try {
        auto env = make_env(cfg.env, run_seed, layout_text);
        LearnerConfig lc = cfg.learner;
        lc.seed = run_seed;
        const PotentialTable* phi = method == Method::Shaping ? &advice.potential : nullptr;
        const ShieldMask* shield = method == Method::Shielding ? &advice.shield : nullptr;
        RunResult rr = run_training(*env, lc, phi, shield, cfg.total_steps, window);
        for (std::size_t w = 0; w < rr.window_avg_reward.size(); ++w)
          table.rows.push_back({method, run_seed,
                                static_cast<std::uint64_t>(w + 1) * window,
                                quantize_sig(rr.window_avg_reward[w], 12)});
      } catch (const Error& e) {
        throw Error(std::string("experiment cell method=") + method_name(method) +
                    " seed=" + std::to_string(run_seed) + ": " + e.what());
      }
    }
  }
  table.aggregates = compute_aggregates(table.rows);
  return table;
}

// ---------------------------------------------------------------------------
// CSV round-trip with embedded manifest.
// ---------------------------------------------------------------------------

inline std::string curve_csv_text(const CurveTable& table) {
  std::ostringstream payload;
  payload << "method,seed,step,window_avg_reward\n";
  for (const auto& r : table.rows)
    payload << method_name(r.method) << "," << r.seed << "," << r.step << ","
            << fmt_sig(r.value, 12) << "\n";
  return "# config " + table.config_text + "\n# hash " +
         manifest_hash(table.config_text, payload.str()) + "\n" + payload.str();
}

inline std::string aggregate_csv_text(const CurveTable& table) {
  std::ostringstream payload;
  payload << "method,step,mean,stddev\n";
  for (const auto& r : table.aggregates)
    payload << method_name(r.method) << "," << r.step << "," << fmt_sig(r.mean, 12) << ","
            << fmt_sig(r.stddev, 12) << "\n";
  return "# config " + table.config_text + "\n# hash " +
         manifest_hash(table.config_text, payload.str()) + "\n" + payload.str();
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace detail

// Parses a curve CSV produced by curve_csv_text, recomputes aggregates, and
// verifies the embedded hash against the payload.
inline CurveTable parse_curve_csv(const std::string& text) {
  CurveTable table;
  std::istringstream in(text);
  std::string line, hash_line, payload;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.rfind("# config ", 0) == 0) {
      table.config_text = line.substr(9);
      continue;
    }
    if (line.rfind("# hash ", 0) == 0) {
      hash_line = line.substr(7);
      continue;
    }
    payload += line + "\n";
    if (!header_seen) {
      if (line != "method,seed,step,window_avg_reward")
        throw ParseError("unexpected curve CSV header: " + line);
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (cells.size() != 4) throw ParseError("bad curve CSV row: " + line);
    CurveRow r;
    r.method = method_from_name(cells[0]);
    r.seed = std::stoull(cells[1]);
    r.step = std::stoull(cells[2]);
    r.value = std::strtod(cells[3].c_str(), nullptr);
    table.rows.push_back(r);
  }
  if (!header_seen) throw ParseError("curve CSV has no header");
  if (!hash_line.empty() && hash_line != manifest_hash(table.config_text, payload))
    throw ParseError("curve CSV content hash mismatch");
  table.aggregates = compute_aggregates(table.rows);
  return table;
}

inline void save_curves(const CurveTable& table, const std::string& csv_path,
                        const std::string& aggregate_path) {
  if (!csv_path.empty()) write_file_atomic(csv_path, curve_csv_text(table));
  if (!aggregate_path.empty()) write_file_atomic(aggregate_path, aggregate_csv_text(table));
}

inline CurveTable load_curves(const std::string& csv_path) {
  return parse_curve_csv(read_file(csv_path));
}

// ---------------------------------------------------------------------------
// Method comparison.
// ---------------------------------------------------------------------------

// Welch 95% comparison of the per-seed window means of two methods at a step.
inline WelchResult compare_methods(const CurveTable& table, std::uint64_t step,
                                   Method a, Method b) {
  std::vector<double> va, vb;
  for (const auto& r : table.rows) {
    if (r.step != step) continue;
    if (r.method == a) va.push_back(r.value);
    if (r.method == b) vb.push_back(r.value);
  }
  if (va.size() < 2 || vb.size() < 2)
    throw InsufficientSeedsError("compare_methods needs >= 2 seeds per method at step " +
                                 std::to_string(step));
  return welch_compare(va, vb, 0.95);
}

// Last step present in the table.
inline std::uint64_t final_step(const CurveTable& table) {
  std::uint64_t s = 0;
  for (const auto& r : table.rows) s = std::max(s, r.step);
  return s;
}

inline std::vector<double> values_at(const CurveTable& table, Method m, std::uint64_t step) {
  std::vector<double> out;
  for (const auto& r : table.rows)
    if (r.method == m && r.step == step) out.push_back(r.value);
  return out;
}

// ---------------------------------------------------------------------------
// SVG plot emission.
// ---------------------------------------------------------------------------

namespace detail {

struct PlotSeries {
  Method method;
  std::vector<std::uint64_t> steps;
  std::vector<double> mean, lo, hi;
};

inline const char* method_color(Method m) {
  switch (m) {
    case Method::Baseline: return "#7f7f7f";
    case Method::Shaping: return "#1f77b4";
    case Method::Shielding: return "#d62728";
  }
  return "#000000";
}

inline std::string method_label(Method m) {
  std::string s = method_name(m);
  s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

inline std::string fmt_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return std::string(buf);
}

}  // namespace detail

// One mean line per method with a +-1 stddev band, axis labels matching the
// published figures. The aggregate numbers ride along in data-points
// attributes so the file is machine-checkable without inverting coordinates.
inline std::string plot_svg_text(const CurveTable& table) {
  if (table.aggregates.empty()) throw ConfigError("cannot plot an empty curve table");

  std::vector<detail::PlotSeries> series;
  for (const auto& r : table.aggregates) {
    detail::PlotSeries* s = nullptr;
    for (auto& existing : series)
      if (existing.method == r.method) s = &existing;
    if (s == nullptr) {
      series.push_back({});
      s = &series.back();
      s->method = r.method;
    }
    s->steps.push_back(r.step);
    s->mean.push_back(r.mean);
    s->lo.push_back(r.mean - r.stddev);
    s->hi.push_back(r.mean + r.stddev);
  }

  double xmax = 0.0, ymin = 0.0, ymax = 0.0;
  bool first = true;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.steps.size(); ++i) {
      xmax = std::max(xmax, static_cast<double>(s.steps[i]));
      if (first) {
        ymin = s.lo[i];
        ymax = s.hi[i];
        first = false;
      } else {
        ymin = std::min(ymin, s.lo[i]);
        ymax = std::max(ymax, s.hi[i]);
      }
    }
  if (xmax <= 0.0) xmax = 1.0;
  if (ymax - ymin < 1e-12) {
    ymin -= 1.0;
    ymax += 1.0;
  }
  double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;

  const double width = 900, height = 560;
  const double ml = 90, mr = 30, mt = 30, mb = 70;
  auto xpix = [&](double step) { return ml + (width - ml - mr) * (step / xmax); };
  auto ypix = [&](double v) {
    return mt + (height - mt - mb) * (1.0 - (v - ymin) / (ymax - ymin));
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "<!-- config " << table.config_text << " -->\n";

  out << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";

  // Axes and ticks.
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
      << height - mb << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
      << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    double step = xmax * i / 5.0;
    double x = xpix(step);
    out << "<line x1=\"" << detail::fmt_coord(x) << "\" y1=\"" << height - mb
        << "\" x2=\"" << detail::fmt_coord(x) << "\" y2=\"" << height - mb + 6
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << detail::fmt_coord(x) << "\" y=\"" << height - mb + 22
        << "\" text-anchor=\"middle\" font-size=\"13\">" << fmt_sig(step, 6) << "</text>\n";
    double v = ymin + (ymax - ymin) * i / 5.0;
    double y = ypix(v);
    out << "<line x1=\"" << ml - 6 << "\" y1=\"" << detail::fmt_coord(y) << "\" x2=\"" << ml
        << "\" y2=\"" << detail::fmt_coord(y) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << ml - 10 << "\" y=\"" << detail::fmt_coord(y + 4)
        << "\" text-anchor=\"end\" font-size=\"13\">" << fmt_sig(v, 6) << "</text>\n";
  }
  out << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 20
      << "\" text-anchor=\"middle\" font-size=\"16\">Number of Steps</text>\n";
  out << "<text x=\"24\" y=\"" << (mt + height - mb) / 2
      << "\" text-anchor=\"middle\" font-size=\"16\" transform=\"rotate(-90 24 "
      << (mt + height - mb) / 2 << ")\">Average Reward</text>\n";

  // Bands then lines so every mean stays visible.
  for (const auto& s : series) {
    out << "<polygon fill=\"" << detail::method_color(s.method)
        << "\" fill-opacity=\"0.15\" stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < s.steps.size(); ++i)
      out << detail::fmt_coord(xpix(static_cast<double>(s.steps[i]))) << ","
          << detail::fmt_coord(ypix(s.hi[i])) << " ";
    for (std::size_t i = s.steps.size(); i-- > 0;)
      out << detail::fmt_coord(xpix(static_cast<double>(s.steps[i]))) << ","
          << detail::fmt_coord(ypix(s.lo[i])) << (i ? " " : "");
    out << "\"/>\n";
  }
  for (const auto& s : series) {
    out << "<polyline fill=\"none\" stroke=\"" << detail::method_color(s.method)
        << "\" stroke-width=\"2\" class=\"mean\" data-method=\"" << method_name(s.method)
        << "\" data-points=\"";
    for (std::size_t i = 0; i < s.steps.size(); ++i)
      out << (i ? ";" : "") << s.steps[i] << ":" << fmt_sig(s.mean[i], 12);
    out << "\" points=\"";
    for (std::size_t i = 0; i < s.steps.size(); ++i)
      out << (i ? " " : "") << detail::fmt_coord(xpix(static_cast<double>(s.steps[i])))
          << "," << detail::fmt_coord(ypix(s.mean[i]));
    out << "\"/>\n";
  }

  // Legend.
  double ly = mt + 10;
  for (const auto& s : series) {
    out << "<line x1=\"" << width - mr - 170 << "\" y1=\"" << detail::fmt_coord(ly)
        << "\" x2=\"" << width - mr - 140 << "\" y2=\"" << detail::fmt_coord(ly)
        << "\" stroke=\"" << detail::method_color(s.method) << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << width - mr - 132 << "\" y=\"" << detail::fmt_coord(ly + 4)
        << "\" font-size=\"14\">" << detail::method_label(s.method) << "</text>\n";
    ly += 22;
  }

  out << "</svg>\n";
  std::string body = out.str();
  // The hash binds the config to everything below the comment header.
  std::string::size_type cut = body.find("-->\n") + 4;
  std::string payload = body.substr(cut);
  return body.substr(0, cut) + "<!-- hash " + manifest_hash(table.config_text, payload) +
         " -->\n" + payload;
}

inline void emit_plot(const CurveTable& table, const std::string& path) {
  write_file_atomic(path, plot_svg_text(table));
}

}  // namespace averl

#endif  // AVERL_HARNESS_HPP
