#pragma once

// Brute-force reference computations used only by tests. None of these call
// into the code paths they check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "bsi/machine.hpp"

namespace bsi::oracle {

/// Dense successor table, kNoEdge for missing edges.
using Table = std::vector<State>;

inline State at(const Table& t, int k, State s, int x) { return t[s * k + x]; }

/// Floyd-Warshall style transitive closure.
inline bool strongly_connected(const Table& t, int n, int k) {
  std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
  for (int s = 0; s < n; ++s) {
    r[s][s] = true;
    for (int x = 0; x < k; ++x)
      if (at(t, k, s, x) != kNoEdge) r[s][at(t, k, s, x)] = true;
  }
  for (int m = 0; m < n; ++m)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (r[i][m] && r[m][j]) r[i][j] = true;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!r[i][j]) return false;
  return true;
}

inline bool full_alphabet(const Table& t, int n, int k) {
  for (int x = 0; x < k; ++x) {
    bool used = false;
    for (int s = 0; s < n; ++s) used |= at(t, k, s, x) != kNoEdge;
    if (!used) return false;
  }
  return true;
}

inline bool degrees_ok(const Table& t, int n, int k) {
  for (int s = 0; s < n; ++s) {
    int d = 0;
    for (int x = 0; x < k; ++x) d += at(t, k, s, x) != kNoEdge;
    if (d == 0) return false;
  }
  return true;
}

/// Pr(w | s) at uniform outgoing probabilities, for every word up to
/// `max_len`; two states are distinct iff some word separates them.
inline bool minimal_by_words(const Table& t, int n, int k, int max_len) {
  std::vector<int> deg(n, 0);
  for (int s = 0; s < n; ++s)
    for (int x = 0; x < k; ++x) deg[s] += at(t, k, s, x) != kNoEdge;
  // prob[s] for the current word; extend words depth-first.
  std::set<std::pair<int, int>> separated;
  std::function<void(std::vector<double>&, std::vector<State>&, int)> rec =
      [&](std::vector<double>& prob, std::vector<State>& cur, int len) {
        for (int a = 0; a < n; ++a)
          for (int b = a + 1; b < n; ++b)
            if (prob[a] != prob[b]) separated.insert({a, b});
        if (len == max_len) return;
        for (int x = 0; x < k; ++x) {
          std::vector<double> p2(n);
          std::vector<State> c2(n);
          for (int s = 0; s < n; ++s) {
            if (prob[s] == 0.0 || at(t, k, cur[s], x) == kNoEdge) {
              p2[s] = 0.0;
              c2[s] = cur[s];
            } else {
              p2[s] = prob[s] / deg[cur[s]];
              c2[s] = at(t, k, cur[s], x);
            }
          }
          rec(p2, c2, len + 1);
        }
      };
  std::vector<double> p0(n, 1.0);
  std::vector<State> c0(n);
  std::iota(c0.begin(), c0.end(), 0);
  rec(p0, c0, 0);
  return static_cast<int>(separated.size()) == n * (n - 1) / 2;
}

/// Lexicographically least table over all n! relabelings.
inline Table canonical_by_permutation(const Table& t, int n, int k) {
  std::vector<State> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Table best;
  do {
    // perm[old] = new label
    Table r(t.size(), kNoEdge);
    for (int s = 0; s < n; ++s)
      for (int x = 0; x < k; ++x) {
        const State to = at(t, k, s, x);
        r[perm[s] * k + x] = to == kNoEdge ? kNoEdge : perm[to];
      }
    if (best.empty() || r < best) best = r;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Every partial transition function, filtered by the membership predicates
/// and deduplicated by permutation canonical form.
inline std::set<Table> census_by_filtering(int n, int k) {
  std::set<Table> out;
  const int slots = n * k;
  Table t(slots, kNoEdge);
  std::function<void(int)> rec = [&](int i) {
    if (i == slots) {
      if (degrees_ok(t, n, k) && full_alphabet(t, n, k) && strongly_connected(t, n, k) &&
          minimal_by_words(t, n, k, 2 * n)) {
        out.insert(canonical_by_permutation(t, n, k));
      }
      return;
    }
    for (State v = kNoEdge; v < n; ++v) {
      t[i] = v;
      rec(i + 1);
    }
    t[i] = kNoEdge;
  };
  rec(0);
  return out;
}

/// Composite Simpson rule on [0, 1].
inline double simpson_unit(const std::function<double(double)>& f, int intervals) {
  const double h = 1.0 / intervals;
  double sum = f(0.0) + f(1.0);
  for (int i = 1; i < intervals; ++i) sum += f(i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

/// Evidence for a binary-alphabet topology by tensor-product Simpson
/// integration of likelihood x Dirichlet(alpha, alpha) prior over one
/// parameter per two-edge state.
inline double evidence_by_quadrature(const Topology& m, const EdgeCounts& c, double alpha,
                                     int intervals = 200) {
  std::vector<State> free_states;
  for (State s = 0; s < m.n_states(); ++s)
    if (m.has_edge(s, 0) && m.has_edge(s, 1)) free_states.push_back(s);
  const double beta_norm = std::tgamma(2 * alpha) / (std::tgamma(alpha) * std::tgamma(alpha));
  std::vector<double> p(free_states.size());
  std::function<double(std::size_t)> integrate = [&](std::size_t d) -> double {
    if (d == free_states.size()) {
      double like = 1.0;
      for (std::size_t i = 0; i < free_states.size(); ++i) {
        const State s = free_states[i];
        like *= std::pow(p[i], static_cast<double>(c(s, 0))) *
                std::pow(1.0 - p[i], static_cast<double>(c(s, 1))) * beta_norm *
                std::pow(p[i], alpha - 1.0) * std::pow(1.0 - p[i], alpha - 1.0);
      }
      return like;
    }
    return simpson_unit(
        [&](double v) {
          p[d] = v;
          return integrate(d + 1);
        },
        intervals);
  };
  return integrate(0);
}

/// Inverse CDF of Beta(2, 2), F(x) = 3x^2 - 2x^3, by bisection.
inline double beta22_quantile(double q) {
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (3 * mid * mid - 2 * mid * mid * mid < q ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Random machine with every state of out-degree >= 1; not necessarily
/// connected.
inline Table random_table(int n, int k, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(-1, n - 1);
  Table t(n * k);
  do {
    for (auto& v : t) v = pick(rng);
  } while (!degrees_ok(t, n, k));
  return t;
}

}  // namespace bsi::oracle
