#ifndef AVERL_SOLVE_HPP
#define AVERL_SOLVE_HPP

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "averl/common.hpp"
#include "averl/mdp.hpp"

namespace averl {

// ---------------------------------------------------------------------------
// Graph utilities (SCC decomposition drives both chain analysis and the
// communicating check).
// ---------------------------------------------------------------------------

// Iterative Tarjan. Returns component id per node; ids are in reverse
// topological order (a component only has edges into lower ids... the other way
// around is what matters here: we only use ids + component lists).
inline int strongly_connected_components(const std::vector<std::vector<int>>& adj,
                                         std::vector<int>& comp) {
  const int n = static_cast<int>(adj.size());
  comp.assign(n, -1);
  std::vector<int> index(n, -1), low(n, 0), stack;
  std::vector<char> on_stack(n, 0);
  int next_index = 0, num_comps = 0;

  struct Frame { int v; std::size_t child; };
  std::vector<Frame> call;

  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    call.push_back({root, 0});
    while (!call.empty()) {
      auto& fr = call.back();
      int v = fr.v;
      if (fr.child == 0) {
        index[v] = low[v] = next_index++;
        stack.push_back(v);
        on_stack[v] = 1;
      }
      bool descended = false;
      while (fr.child < adj[v].size()) {
        int w = adj[v][fr.child++];
        if (index[w] == -1) {
          call.push_back({w, 0});
          descended = true;
          break;
        }
        if (on_stack[w]) low[v] = std::min(low[v], index[w]);
      }
      if (descended) continue;
      if (low[v] == index[v]) {
        while (true) {
          int w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = num_comps;
          if (w == v) break;
        }
        ++num_comps;
      }
      call.pop_back();
      if (!call.empty()) {
        int parent = call.back().v;
        low[parent] = std::min(low[parent], low[v]);
      }
    }
  }
  return num_comps;
}

inline std::vector<std::vector<int>> action_union_graph(const Mdp& m) {
  std::vector<std::vector<int>> adj(m.num_states());
  for (int s = 0; s < m.num_states(); ++s) {
    for (int a = 0; a < m.num_actions(); ++a)
      for (const auto& t : m.row(s, a))
        adj[s].push_back(t.to);
    std::sort(adj[s].begin(), adj[s].end());
    adj[s].erase(std::unique(adj[s].begin(), adj[s].end()), adj[s].end());
  }
  return adj;
}

// Communicating: every state reaches every other under some policy, i.e. the
// union graph over all available actions is one strongly connected component.
inline bool is_communicating(const Mdp& m) {
  std::vector<int> comp;
  return strongly_connected_components(action_union_graph(m), comp) == 1;
}

// Sub-MDP on the states reachable from the initial state, with index maps in
// both directions. Environment models often carry states the dynamics can
// never enter (a teleport-excluded cell, counter combinations that cannot
// occur); those dead states break the communicating precondition of
// solve_average_reward even though the live part of the chain is fine.
struct ReachableRestriction {
  Mdp mdp;
  std::vector<int> to_original;    // restricted index -> original state
  std::vector<int> from_original;  // original state -> restricted index, -1 if dropped
};

inline ReachableRestriction restrict_to_reachable(const Mdp& m) {
  validate_or_throw(m);
  auto adj = action_union_graph(m);
  std::vector<char> seen(m.num_states(), 0);
  std::vector<int> queue{m.initial_state};
  seen[m.initial_state] = 1;
  for (std::size_t i = 0; i < queue.size(); ++i)
    for (int to : adj[queue[i]])
      if (!seen[to]) {
        seen[to] = 1;
        queue.push_back(to);
      }

  ReachableRestriction out;
  out.from_original.assign(m.num_states(), -1);
  for (int s = 0; s < m.num_states(); ++s)
    if (seen[s]) {
      out.from_original[s] = static_cast<int>(out.to_original.size());
      out.to_original.push_back(s);
    }

  Mdp r(static_cast<int>(out.to_original.size()), m.num_actions());
  r.ap = m.ap;
  r.action_names = m.action_names;
  r.initial_state = out.from_original[m.initial_state];
  if (m.has_coords()) r.coords.resize(out.to_original.size());
  if (!m.state_names.empty()) r.state_names.resize(out.to_original.size());
  for (int ns = 0; ns < r.num_states(); ++ns) {
    const int os = out.to_original[ns];
    r.set_label(ns, m.label(os));
    if (m.has_coords()) r.coords[ns] = m.coords[os];
    if (!m.state_names.empty()) r.state_names[ns] = m.state_name(os);
    for (int a = 0; a < m.num_actions(); ++a)
      for (const auto& t : m.row(os, a))
        r.add_transition(ns, a, out.from_original[t.to], t.prob, t.reward);
  }
  out.mdp = std::move(r);
  return out;
}

// Recurrent classes of the chain induced by a deterministic policy: the closed
// SCCs (no edge leaving the component).
inline std::vector<std::vector<int>> recurrent_classes(const Mdp& m,
                                                       const StationaryPolicy& pi) {
  check_policy(m, pi);
  const int n = m.num_states();
  std::vector<std::vector<int>> adj(n);
  for (int s = 0; s < n; ++s)
    for (const auto& t : m.row(s, pi[s])) adj[s].push_back(t.to);

  std::vector<int> comp;
  int k = strongly_connected_components(adj, comp);
  std::vector<char> closed(k, 1);
  for (int s = 0; s < n; ++s)
    for (int to : adj[s])
      if (comp[to] != comp[s]) closed[comp[s]] = 0;

  std::vector<std::vector<int>> classes(k);
  for (int s = 0; s < n; ++s)
    if (closed[comp[s]]) classes[comp[s]].push_back(s);
  classes.erase(std::remove_if(classes.begin(), classes.end(),
                               [](const auto& c) { return c.empty(); }),
                classes.end());
  return classes;
}

// Stationary distribution of the unichain induced by pi, zero on transient
// states. Solves mu^T P = mu^T, sum(mu) = 1 restricted to the recurrent class:
// rank of (P^T - I) there is |C|-1, so replacing one row with the normalization
// makes the system square and nonsingular.
inline std::vector<double> stationary_distribution(const Mdp& m,
                                                   const StationaryPolicy& pi) {
  auto classes = recurrent_classes(m, pi);
  if (classes.size() != 1)
    throw NonUnichainError("policy induces " + std::to_string(classes.size()) +
                           " recurrent classes");
  const auto& cls = classes[0];
  const int k = static_cast<int>(cls.size());
  std::vector<int> local(m.num_states(), -1);
  for (int i = 0; i < k; ++i) local[cls[i]] = i;

  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < k; ++i) {
    int s = cls[i];
    for (const auto& t : m.row(s, pi[s])) {
      int j = local[t.to];  // recurrent classes are closed, so j >= 0
      if (j != 0) trip.emplace_back(j, i, t.prob);
    }
    if (i != 0) trip.emplace_back(i, i, -1.0);
    trip.emplace_back(0, i, 1.0);  // normalization row
  }
  Eigen::SparseMatrix<double> A(k, k);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success)
    throw NoConvergenceError("stationary distribution solve failed");
  Eigen::VectorXd b = Eigen::VectorXd::Zero(k);
  b(0) = 1.0;
  Eigen::VectorXd mu = lu.solve(b);

  std::vector<double> out(m.num_states(), 0.0);
  double total = 0.0;
  for (int i = 0; i < k; ++i) total += std::max(0.0, mu(i));
  for (int i = 0; i < k; ++i) out[cls[i]] = std::max(0.0, mu(i)) / total;
  return out;
}

// Long-run average reward of a deterministic policy on a unichain:
// rho = sum_s mu(s) rbar(s, pi(s)).
inline double policy_gain(const Mdp& m, const StationaryPolicy& pi) {
  auto mu = stationary_distribution(m, pi);
  double rho = 0.0;
  for (int s = 0; s < m.num_states(); ++s)
    if (mu[s] > 0.0) rho += mu[s] * m.expected_reward(s, pi[s]);
  return rho;
}

// Simulation estimate of the same quantity; the statistical cross-check for
// policy_gain and the environments' reward accounting.
inline double monte_carlo_gain(const Mdp& m, const StationaryPolicy& pi,
                               long long steps, std::uint64_t seed) {
  check_policy(m, pi);
  Rng rng(seed);
  int s = m.initial_state;
  double total = 0.0;
  for (long long i = 0; i < steps; ++i) {
    const auto& row = m.row(s, pi[s]);
    double u = rng.uniform(), acc = 0.0;
    const Transition* chosen = &row.back();
    for (const auto& t : row) {
      acc += t.prob;
      if (u < acc) { chosen = &t; break; }
    }
    total += chosen->reward;
    s = chosen->to;
  }
  return total / static_cast<double>(steps);
}

// ---------------------------------------------------------------------------
// Average-reward optimality: relative value iteration.
// ---------------------------------------------------------------------------

struct SolveOptions {
  double span_tolerance = 1e-10;
  long long max_iterations = 1000000;
  // Aperiodicity damping: iterate h <- (1-damping) h + damping T h. Plain value
  // iteration can cycle forever on periodic chains; the damped operator is the
  // Bellman operator of an aperiodic transformation with the same gain, and the
  // fixed point satisfies T h = h + rho* exactly as for the original MDP.
  double damping = 0.5;
  int reference_state = -1;  // < 0: use the MDP's initial state
};

struct SolveResult {
  double gain = 0.0;
  // Flat (s * num_actions + a); entries of unavailable actions are 0 and must
  // not be read. max_a q[ref * A + a] is exactly 0 by construction.
  std::vector<double> q;
  StationaryPolicy policy;  // greedy in q, lowest index on ties
  long long iterations = 0;
  double residual = 0.0;  // max-norm Bellman residual of (gain, q)
  int reference_state = 0;
};

inline double state_value(const Mdp& m, const std::vector<double>& q, int s) {
  double best = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < m.num_actions(); ++a)
    if (m.action_available(s, a))
      best = std::max(best, q[static_cast<std::size_t>(s) * m.num_actions() + a]);
  return best;
}

// Max-norm residual of the average-reward optimality equation:
// max over available (s,a) of |rbar + sum_s' P max_a' q(s',a') - gain - q(s,a)|.
inline double bellman_residual(const Mdp& m, double gain,
                               const std::vector<double>& q) {
  const int A = m.num_actions();
  std::vector<double> v(m.num_states());
  for (int s = 0; s < m.num_states(); ++s) v[s] = state_value(m, q, s);
  double worst = 0.0;
  for (int s = 0; s < m.num_states(); ++s)
    for (int a = 0; a < A; ++a) {
      if (!m.action_available(s, a)) continue;
      double backup = 0.0;
      for (const auto& t : m.row(s, a)) backup += t.prob * (t.reward + v[t.to]);
      worst = std::max(worst, std::abs(backup - gain - q[static_cast<std::size_t>(s) * A + a]));
    }
  return worst;
}

inline StationaryPolicy greedy_policy(const Mdp& m, const std::vector<double>& q) {
  StationaryPolicy pi;
  pi.action.assign(m.num_states(), -1);
  const int A = m.num_actions();
  for (int s = 0; s < m.num_states(); ++s) {
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < A; ++a) {
      if (!m.action_available(s, a)) continue;
      double val = q[static_cast<std::size_t>(s) * A + a];
      if (val > best) { best = val; pi.action[s] = a; }
    }
  }
  return pi;
}

// Actions within tie_tolerance of the best available value at s.
inline std::vector<int> optimal_action_set(const Mdp& m, const std::vector<double>& q,
                                           int s, double tie_tolerance) {
  double best = state_value(m, q, s);
  std::vector<int> out;
  for (int a = 0; a < m.num_actions(); ++a)
    if (m.action_available(s, a) &&
        q[static_cast<std::size_t>(s) * m.num_actions() + a] >= best - tie_tolerance)
      out.push_back(a);
  return out;
}

// Relative value iteration for communicating MDPs. Produces the optimal gain
// and a relative action-value table normalized so the best action at the
// reference state scores exactly 0; the optimality equation is invariant to
// that shift. Stops when span(T h - h) < span_tolerance, which bounds both
// |gain - rho*| and the final Bellman residual by span_tolerance / 2.
inline SolveResult solve_average_reward(const Mdp& m, const SolveOptions& opts = {}) {
  validate_or_throw(m);
  if (!is_communicating(m))
    throw NotCommunicatingError("MDP is not communicating; optimal gain may not be constant");

  const int n = m.num_states();
  const int A = m.num_actions();
  const int ref = opts.reference_state < 0 ? m.initial_state : opts.reference_state;
  const double tau = opts.damping;

  std::vector<double> h(n, 0.0), th(n, 0.0);
  double gain = 0.0;
  long long iter = 0;
  bool converged = false;

  for (iter = 1; iter <= opts.max_iterations; ++iter) {
    for (int s = 0; s < n; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < A; ++a) {
        const auto& row = m.row(s, a);
        if (row.empty()) continue;
        double backup = 0.0;
        for (const auto& t : row) backup += t.prob * (t.reward + h[t.to]);
        best = std::max(best, backup);
      }
      th[s] = best;
    }
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int s = 0; s < n; ++s) {
      double d = th[s] - h[s];
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    if (hi - lo < opts.span_tolerance) {
      gain = 0.5 * (hi + lo);
      converged = true;
      break;
    }
    double shift = (1.0 - tau) * h[ref] + tau * th[ref];
    for (int s = 0; s < n; ++s) h[s] = (1.0 - tau) * h[s] + tau * th[s] - shift;
  }
  if (!converged)
    throw NoConvergenceError("value iteration span above tolerance after " +
                             std::to_string(opts.max_iterations) + " iterations");

  SolveResult res;
  res.gain = gain;
  res.iterations = iter;
  res.reference_state = ref;
  res.q.assign(static_cast<std::size_t>(n) * A, 0.0);
  for (int s = 0; s < n; ++s)
    for (int a = 0; a < A; ++a) {
      const auto& row = m.row(s, a);
      if (row.empty()) continue;
      double backup = 0.0;
      for (const auto& t : row) backup += t.prob * (t.reward + h[t.to]);
      res.q[static_cast<std::size_t>(s) * A + a] = backup - gain;
    }
  double shift = state_value(m, res.q, ref);
  for (int s = 0; s < n; ++s)
    for (int a = 0; a < A; ++a)
      if (m.action_available(s, a))
        res.q[static_cast<std::size_t>(s) * A + a] -= shift;

  res.policy = greedy_policy(m, res.q);
  res.residual = bellman_residual(m, res.gain, res.q);
  return res;
}

}  // namespace averl

#endif  // AVERL_SOLVE_HPP
