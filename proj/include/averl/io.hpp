#ifndef AVERL_IO_HPP
#define AVERL_IO_HPP

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "averl/ap.hpp"
#include "averl/automaton.hpp"
#include "averl/common.hpp"
#include "averl/learn.hpp"
#include "averl/mdp.hpp"
#include "averl/potential.hpp"

namespace averl {

// Writers are hand-assembled so the emitted digit counts are exactly the
// documented ones (15 significant digits for probabilities and rewards, 12
// for potentials and Q values); readers go through a JSON parser.

inline std::string fmt_sig(double v, int digits) {
  if (!std::isfinite(v)) throw IoError("refusing to serialize a non-finite number");
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return std::string(buf);
}

// The double a reader will see for a value emitted at `digits` significant
// digits; aggregate computations use this so files and memory agree bit-exactly.
inline double quantize_sig(double v, int digits) {
  return std::strtod(fmt_sig(v, digits).c_str(), nullptr);
}

inline std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

inline std::string quoted(const std::string& s) { return "\"" + json_escape(s) + "\""; }

// --- files -------------------------------------------------------------------

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading " + path);
  return ss.str();
}

// Temp-then-rename so concurrent readers never observe a half-written file.
inline void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
    if (ec) throw IoError("cannot create directory for " + path + ": " + ec.message());
  }
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("error writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path + ": " + ec.message());
}

// --- content hashing (FNV-1a 64) ----------------------------------------------

inline std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

// Output manifests bind the resolved config to the payload it produced.
inline std::string manifest_hash(const std::string& config_json, const std::string& payload) {
  return hash_hex(fnv1a(config_json + "\n" + payload));
}

// --- JSON reading helpers ------------------------------------------------------

namespace detail {

inline nlohmann::json parse_json(const std::string& text, const std::string& what) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError("malformed JSON in " + what);
  return j;
}

inline const nlohmann::json& need(const nlohmann::json& j, const char* key,
                                  const std::string& what) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(what + " is missing key '" + key + "'");
  return *it;
}

inline std::map<std::string, int> name_index(const std::vector<std::string>& names,
                                             const std::string& what) {
  std::map<std::string, int> idx;
  for (std::size_t i = 0; i < names.size(); ++i)
    if (!idx.emplace(names[i], static_cast<int>(i)).second)
      throw ParseError("duplicate " + what + " name '" + names[i] + "'");
  return idx;
}

inline int lookup(const std::map<std::string, int>& idx, const std::string& name,
                  const std::string& what) {
  auto it = idx.find(name);
  if (it == idx.end()) throw ParseError("unknown " + what + " name '" + name + "'");
  return it->second;
}

}  // namespace detail

// --- MDP -----------------------------------------------------------------------

inline std::string mdp_to_text(const Mdp& m) {
  std::ostringstream out;
  out << "{\n  \"ap\": [";
  for (int i = 0; i < m.ap.size(); ++i)
    out << (i ? ", " : "") << quoted(m.ap.name(i));
  out << "],\n  \"states\": [\n";
  for (int s = 0; s < m.num_states(); ++s) {
    out << "    {\"name\": " << quoted(m.state_name(s)) << ", \"labels\": [";
    bool first = true;
    for (int i = 0; i < m.ap.size(); ++i)
      if (letter_has(m.label(s), i)) {
        out << (first ? "" : ", ") << quoted(m.ap.name(i));
        first = false;
      }
    out << "]}" << (s + 1 < m.num_states() ? "," : "") << "\n";
  }
  out << "  ],\n  \"actions\": [";
  for (int a = 0; a < m.num_actions(); ++a)
    out << (a ? ", " : "") << quoted(m.action_name(a));
  out << "],\n  \"initial\": " << quoted(m.state_name(m.initial_state));
  if (m.has_coords()) {
    out << ",\n  \"coords\": [";
    for (int s = 0; s < m.num_states(); ++s)
      out << (s ? ", " : "") << "[" << m.coords[s].row << ", " << m.coords[s].col << "]";
    out << "]";
  }
  out << ",\n  \"transitions\": [\n";
  bool first_row = true;
  for (int s = 0; s < m.num_states(); ++s)
    for (int a = 0; a < m.num_actions(); ++a) {
      if (!m.action_available(s, a)) continue;
      if (!first_row) out << ",\n";
      first_row = false;
      out << "    {\"s\": " << quoted(m.state_name(s)) << ", \"a\": "
          << quoted(m.action_name(a)) << ", \"to\": [";
      const auto& row = m.row(s, a);
      for (std::size_t i = 0; i < row.size(); ++i)
        out << (i ? ", " : "") << "{\"s2\": " << quoted(m.state_name(row[i].to))
            << ", \"p\": " << fmt_sig(row[i].prob, 15)
            << ", \"r\": " << fmt_sig(row[i].reward, 15) << "}";
      out << "]}";
    }
  out << "\n  ]\n}\n";
  return out.str();
}

inline Mdp mdp_from_text(const std::string& text, const std::string& what = "MDP file") {
  using nlohmann::json;
  json j = detail::parse_json(text, what);
  try {
    std::vector<std::string> ap_names =
        detail::need(j, "ap", what).get<std::vector<std::string>>();
    ApRegistry reg(ap_names);

    std::vector<std::string> state_names, action_names;
    std::vector<Letter> labels;
    for (const auto& st : detail::need(j, "states", what)) {
      state_names.push_back(detail::need(st, "name", what).get<std::string>());
      std::vector<std::string> props;
      for (const auto& l : detail::need(st, "labels", what))
        props.push_back(l.get<std::string>());
      labels.push_back(reg.letter(props));
    }
    action_names = detail::need(j, "actions", what).get<std::vector<std::string>>();
    auto sidx = detail::name_index(state_names, "state");
    auto aidx = detail::name_index(action_names, "action");

    Mdp m(static_cast<int>(state_names.size()), static_cast<int>(action_names.size()));
    m.ap = reg;
    m.state_names = state_names;
    m.action_names = action_names;
    for (std::size_t s = 0; s < labels.size(); ++s)
      m.set_label(static_cast<int>(s), labels[s]);
    m.initial_state =
        detail::lookup(sidx, detail::need(j, "initial", what).get<std::string>(), "state");

    if (j.contains("coords")) {
      for (const auto& c : j["coords"]) {
        if (!c.is_array() || c.size() != 2) throw ParseError(what + ": bad coords entry");
        m.coords.push_back({c[0].get<int>(), c[1].get<int>()});
      }
      if (static_cast<int>(m.coords.size()) != m.num_states())
        throw ParseError(what + ": coords length does not match states");
    }

    for (const auto& row : detail::need(j, "transitions", what)) {
      int s = detail::lookup(sidx, detail::need(row, "s", what).get<std::string>(), "state");
      int a = detail::lookup(aidx, detail::need(row, "a", what).get<std::string>(), "action");
      if (m.action_available(s, a))
        throw ParseError(what + ": duplicate transition row for " + state_names[s] + "/" +
                         action_names[a]);
      std::vector<Transition> tr;
      for (const auto& t : detail::need(row, "to", what)) {
        int s2 =
            detail::lookup(sidx, detail::need(t, "s2", what).get<std::string>(), "state");
        tr.push_back({s2, detail::need(t, "p", what).get<double>(),
                      detail::need(t, "r", what).get<double>()});
      }
      if (tr.empty()) throw ParseError(what + ": empty successor list");
      m.set_row(s, a, std::move(tr));
    }
    validate_or_throw(m);
    return m;
  } catch (const json::exception& e) {
    throw ParseError(what + ": " + e.what());
  }
}

inline void save_mdp(const Mdp& m, const std::string& path) {
  write_file_atomic(path, mdp_to_text(m));
}
inline Mdp load_mdp(const std::string& path) {
  return mdp_from_text(read_file(path), path);
}

// --- DFA -----------------------------------------------------------------------

// Emits one row per (state, letter) with the letter written as a full minterm
// over the registry, so the loader's pattern expansion reproduces delta exactly.
inline std::string dfa_to_text(const SafetyAutomaton& aut) {
  const ApRegistry& reg = aut.ap;
  std::ostringstream out;
  out << "{\n  \"ap\": [";
  for (int i = 0; i < reg.size(); ++i) out << (i ? ", " : "") << quoted(reg.name(i));
  out << "],\n  \"states\": [\n";
  for (int q = 0; q < aut.num_states(); ++q)
    out << "    {\"name\": " << quoted(aut.state_name(q))
        << ", \"accepting\": " << (aut.is_accepting(q) ? "true" : "false")
        << (q + 1 < aut.num_states() ? "},\n" : "}\n");
  out << "  ],\n  \"initial\": " << quoted(aut.state_name(aut.initial()));
  out << ",\n  \"transitions\": [\n";
  for (int q = 0; q < aut.num_states(); ++q) {
    for (Letter l = 0; l < reg.alphabet_size(); ++l) {
      std::string when;
      if (reg.size() == 0) {
        when = "true";
      } else {
        for (int i = 0; i < reg.size(); ++i) {
          if (!when.empty()) when += " & ";
          if (!letter_has(l, i)) when += "!";
          when += reg.name(i);
        }
      }
      out << "    {\"from\": " << quoted(aut.state_name(q)) << ", \"when\": "
          << quoted(when) << ", \"to\": " << quoted(aut.state_name(aut.step(q, l))) << "}";
      bool last = (q + 1 == aut.num_states()) && (l + 1 == reg.alphabet_size());
      out << (last ? "\n" : ",\n");
    }
  }
  out << "  ]\n}\n";
  return out.str();
}

inline SafetyAutomaton dfa_from_text(const std::string& text,
                                     const std::string& what = "DFA file") {
  using nlohmann::json;
  json j = detail::parse_json(text, what);
  try {
    ApRegistry reg(detail::need(j, "ap", what).get<std::vector<std::string>>());

    std::vector<std::string> names;
    std::vector<bool> accepting;
    for (const auto& st : detail::need(j, "states", what)) {
      names.push_back(detail::need(st, "name", what).get<std::string>());
      accepting.push_back(detail::need(st, "accepting", what).get<bool>());
    }
    auto qidx = detail::name_index(names, "DFA state");
    int initial =
        detail::lookup(qidx, detail::need(j, "initial", what).get<std::string>(), "DFA state");

    SafetyAutomaton aut(reg, static_cast<int>(names.size()), initial);
    aut.state_names = names;
    for (std::size_t q = 0; q < names.size(); ++q)
      aut.set_accepting(static_cast<int>(q), accepting[q]);

    // Pattern rows assign every letter satisfying `when`; overlapping patterns
    // must agree on the target.
    std::vector<int> target(static_cast<std::size_t>(aut.num_states()) * reg.alphabet_size(),
                            -1);
    for (const auto& row : detail::need(j, "transitions", what)) {
      int from = detail::lookup(qidx, detail::need(row, "from", what).get<std::string>(),
                                "DFA state");
      int to =
          detail::lookup(qidx, detail::need(row, "to", what).get<std::string>(), "DFA state");
      PropExpr when =
          parse_prop_expr(detail::need(row, "when", what).get<std::string>(), reg);
      for (Letter l = 0; l < reg.alphabet_size(); ++l) {
        if (!when.eval(l)) continue;
        int& slot = target[static_cast<std::size_t>(from) * reg.alphabet_size() + l];
        if (slot >= 0 && slot != to)
          throw ParseError(what + ": conflicting targets for state '" + names[from] +
                           "' on one letter");
        slot = to;
      }
    }
    for (int q = 0; q < aut.num_states(); ++q)
      for (Letter l = 0; l < reg.alphabet_size(); ++l) {
        int to = target[static_cast<std::size_t>(q) * reg.alphabet_size() + l];
        if (to < 0)
          throw NonTotalTransitionError(what + ": state '" + names[q] +
                                        "' has no transition for some letter");
        aut.set_step(q, l, to);
      }
    aut.check_total();
    return aut;
  } catch (const json::exception& e) {
    throw ParseError(what + ": " + e.what());
  }
}

inline void save_dfa(const SafetyAutomaton& aut, const std::string& path) {
  write_file_atomic(path, dfa_to_text(aut));
}
inline SafetyAutomaton load_dfa(const std::string& path) {
  return dfa_from_text(read_file(path), path);
}

// --- potential table -------------------------------------------------------------

inline std::string potential_to_text(const PotentialTable& p) {
  std::ostringstream out;
  out << "{\n  \"c\": " << fmt_sig(p.c, 12) << ",\n  \"num_states\": " << p.num_states
      << ",\n  \"num_actions\": " << p.num_actions << ",\n  \"distance\": "
      << quoted(p.distance_id) << ",\n  \"clamped\": " << p.clamped_count
      << ",\n  \"empty_region\": " << (p.empty_region ? "true" : "false")
      << ",\n  \"member\": [\n";
  for (int s = 0; s < p.num_states; ++s) {
    out << "    [";
    for (int a = 0; a < p.num_actions; ++a)
      out << (a ? "," : "") << (p.member(s, a) ? 1 : 0);
    out << "]" << (s + 1 < p.num_states ? "," : "") << "\n";
  }
  out << "  ],\n  \"phi\": [\n";
  for (int s = 0; s < p.num_states; ++s) {
    out << "    [";
    for (int a = 0; a < p.num_actions; ++a)
      out << (a ? ", " : "") << fmt_sig(p.at(s, a), 12);
    out << "]" << (s + 1 < p.num_states ? "," : "") << "\n";
  }
  out << "  ]\n}\n";
  return out.str();
}

inline PotentialTable potential_from_text(const std::string& text,
                                          const std::string& what = "potential file") {
  using nlohmann::json;
  json j = detail::parse_json(text, what);
  try {
    PotentialTable p;
    p.c = detail::need(j, "c", what).get<double>();
    p.num_states = detail::need(j, "num_states", what).get<int>();
    p.num_actions = detail::need(j, "num_actions", what).get<int>();
    p.distance_id = detail::need(j, "distance", what).get<std::string>();
    p.clamped_count = detail::need(j, "clamped", what).get<int>();
    p.empty_region = detail::need(j, "empty_region", what).get<bool>();
    const auto& member = detail::need(j, "member", what);
    const auto& phi = detail::need(j, "phi", what);
    if (static_cast<int>(member.size()) != p.num_states ||
        static_cast<int>(phi.size()) != p.num_states)
      throw ParseError(what + ": table height does not match num_states");
    for (int s = 0; s < p.num_states; ++s) {
      if (static_cast<int>(member[s].size()) != p.num_actions ||
          static_cast<int>(phi[s].size()) != p.num_actions)
        throw ParseError(what + ": table width does not match num_actions");
      for (int a = 0; a < p.num_actions; ++a) {
        p.in_region.push_back(member[s][a].get<int>() ? 1 : 0);
        p.phi.push_back(phi[s][a].get<double>());
      }
    }
    return p;
  } catch (const json::exception& e) {
    throw ParseError(what + ": " + e.what());
  }
}

inline void save_potential(const PotentialTable& p, const std::string& path) {
  write_file_atomic(path, potential_to_text(p));
}
inline PotentialTable load_potential(const std::string& path) {
  return potential_from_text(read_file(path), path);
}

// --- learner snapshot -------------------------------------------------------------

inline std::string learner_to_text(const LearnerState& st, const std::string& method) {
  std::ostringstream out;
  out << "{\n  \"method\": " << quoted(method) << ",\n  \"rho_mode\": "
      << quoted(st.rho_mode == RhoMode::PerState ? "per_state" : "scalar")
      << ",\n  \"num_states\": " << st.num_states
      << ",\n  \"num_actions\": " << st.num_actions << ",\n  \"steps\": " << st.t
      << ",\n  \"q\": [\n";
  for (int s = 0; s < st.num_states; ++s) {
    out << "    [";
    for (int a = 0; a < st.num_actions; ++a)
      out << (a ? ", " : "") << fmt_sig(st.q_at(s, a), 12);
    out << "]" << (s + 1 < st.num_states ? "," : "") << "\n";
  }
  out << "  ],\n  \"rho\": [";
  for (std::size_t i = 0; i < st.rho.size(); ++i)
    out << (i ? ", " : "") << fmt_sig(st.rho[i], 12);
  out << "]\n}\n";
  return out.str();
}

struct LearnerSnapshot {
  std::string method;
  LearnerState state;
};

inline LearnerSnapshot learner_from_text(const std::string& text,
                                         const std::string& what = "Q-table file") {
  using nlohmann::json;
  json j = detail::parse_json(text, what);
  try {
    LearnerSnapshot snap;
    snap.method = detail::need(j, "method", what).get<std::string>();
    std::string mode = detail::need(j, "rho_mode", what).get<std::string>();
    if (mode != "per_state" && mode != "scalar")
      throw ParseError(what + ": unknown rho_mode '" + mode + "'");
    int S = detail::need(j, "num_states", what).get<int>();
    int A = detail::need(j, "num_actions", what).get<int>();
    snap.state = make_learner_state(
        S, A, mode == "per_state" ? RhoMode::PerState : RhoMode::SingleScalar);
    snap.state.t = detail::need(j, "steps", what).get<std::uint64_t>();
    const auto& q = detail::need(j, "q", what);
    if (static_cast<int>(q.size()) != S)
      throw ParseError(what + ": q height does not match num_states");
    for (int s = 0; s < S; ++s) {
      if (static_cast<int>(q[s].size()) != A)
        throw ParseError(what + ": q width does not match num_actions");
      for (int a = 0; a < A; ++a)
        snap.state.q[static_cast<std::size_t>(s) * A + a] = q[s][a].get<double>();
    }
    const auto& rho = detail::need(j, "rho", what);
    if (rho.size() != snap.state.rho.size())
      throw ParseError(what + ": rho length does not match rho_mode");
    for (std::size_t i = 0; i < snap.state.rho.size(); ++i)
      snap.state.rho[i] = rho[i].get<double>();
    return snap;
  } catch (const json::exception& e) {
    throw ParseError(what + ": " + e.what());
  }
}

inline void save_learner(const LearnerState& st, const std::string& method,
                         const std::string& path) {
  write_file_atomic(path, learner_to_text(st, method));
}
inline LearnerSnapshot load_learner(const std::string& path) {
  return learner_from_text(read_file(path), path);
}

}  // namespace averl

#endif  // AVERL_IO_HPP
