#pragma once

// Core automaton types for unifilar edge-labeled machines: deterministic path
// tracing, stationary state distributions, and the information measures.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace bsi {

using State = std::int32_t;
using Symbol = std::uint8_t;

inline constexpr State kNoEdge = -1;

/// An observed symbol series over the alphabet {0, ..., alphabet_size - 1}.
class DataSeries {
 public:
  DataSeries() = default;
  /// Throws InputError if any symbol is outside the alphabet.
  DataSeries(std::vector<Symbol> symbols, int alphabet_size);

  /// Parses ASCII digits; whitespace is skipped. Any other character, or a
  /// digit >= alphabet_size, throws InputError.
  static DataSeries parse(std::string_view text, int alphabet_size);

  std::span<const Symbol> symbols() const { return symbols_; }
  std::size_t size() const { return symbols_.size(); }
  bool empty() const { return symbols_.empty(); }
  int alphabet_size() const { return alphabet_size_; }
  Symbol operator[](std::size_t i) const { return symbols_[i]; }

  /// First `length` symbols (clamped to size()).
  DataSeries prefix(std::size_t length) const;
  std::string to_string() const;

 private:
  std::vector<Symbol> symbols_;
  int alphabet_size_ = 2;
};

struct Edge {
  State from;
  Symbol symbol;
  State to;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Edge-labeled unifilar machine topology. The transition map is stored as a
/// dense n*k table so (state, symbol) admits at most one successor.
class Topology {
 public:
  Topology() = default;
  /// `successors[s * k + x]` is the target of the x-edge leaving s, or kNoEdge.
  /// Throws InputError unless every target is in range and every state has
  /// at least one outgoing edge.
  Topology(std::string id, int n_states, int alphabet_size,
           std::vector<State> successors);

  static Topology from_edges(std::string id, int n_states, int alphabet_size,
                             std::span<const Edge> edges);

  const std::string& id() const { return id_; }
  void set_id(std::string id) { id_ = std::move(id); }
  int n_states() const { return n_states_; }
  int alphabet_size() const { return alphabet_size_; }
  State next(State s, Symbol x) const { return successors_[s * alphabet_size_ + x]; }
  bool has_edge(State s, Symbol x) const { return next(s, x) != kNoEdge; }
  int out_degree(State s) const;
  std::size_t edge_count() const;
  /// Edges sorted by (from, symbol).
  std::vector<Edge> edges() const;
  std::span<const State> successor_table() const { return successors_; }

  /// Same labelled edge structure; ids are ignored.
  bool same_structure(const Topology& other) const {
    return n_states_ == other.n_states_ && alphabet_size_ == other.alphabet_size_ &&
           successors_ == other.successors_;
  }

 private:
  std::string id_;
  int n_states_ = 0;
  int alphabet_size_ = 0;
  std::vector<State> successors_;
};

/// Per-edge transition probabilities p(x | s), stored densely like the
/// topology's successor table; absent edges hold 0.
class TransitionAssignment {
 public:
  TransitionAssignment() = default;
  TransitionAssignment(int n_states, int alphabet_size, std::vector<double> probs)
      : n_states_(n_states), alphabet_size_(alphabet_size), probs_(std::move(probs)) {}

  /// Every edge of an out-degree-d state gets 1/d.
  static TransitionAssignment uniform(const Topology& topology);

  double operator()(State s, Symbol x) const { return probs_[s * alphabet_size_ + x]; }
  double& operator()(State s, Symbol x) { return probs_[s * alphabet_size_ + x]; }
  int n_states() const { return n_states_; }
  int alphabet_size() const { return alphabet_size_; }
  std::span<const double> values() const { return probs_; }

  /// Largest |sum_x p(x|s) - 1| over states.
  double max_row_error() const;
  /// True if the assignment matches the topology's edges, every edge has
  /// probability in (0, 1], out-degree-1 states carry exactly 1, and rows
  /// sum to 1 within `tolerance`.
  bool valid_for(const Topology& topology, double tolerance = 1e-12) const;

 private:
  int n_states_ = 0;
  int alphabet_size_ = 0;
  std::vector<double> probs_;
};

/// Edge counts n(s x | s0) for one traced path.
struct EdgeCounts {
  State start_state = 0;
  int n_states = 0;
  int alphabet_size = 0;
  std::vector<std::uint64_t> counts;  // n_states * alphabet_size

  std::uint64_t operator()(State s, Symbol x) const { return counts[s * alphabet_size + x]; }
  std::uint64_t visits(State s) const;
  std::uint64_t total() const;

  friend bool operator==(const EdgeCounts&, const EdgeCounts&) = default;
};

/// Counts of the unique path that starts in `start` and emits `data`, or
/// nullopt if some symbol has no outgoing edge on the way (zero likelihood).
/// Throws InputError if the series alphabet differs from the topology's or
/// `start` is out of range.
std::optional<EdgeCounts> trace_path(const Topology& topology, State start,
                                     const DataSeries& data);

/// Traces every start state in one pass; element s is trace_path(topology, s, data).
/// Paths that land on the same state at the same time share their remaining
/// walk, so the cost is close to a single trace for synchronizing machines.
std::vector<std::optional<EdgeCounts>> trace_all_starts(const Topology& topology,
                                                        const DataSeries& data);

struct StationaryDistribution {
  std::vector<double> probs;
};

/// State-to-state matrix T = sum_x T^(x).
Eigen::MatrixXd state_transition_matrix(const Topology& topology,
                                        const TransitionAssignment& theta);

/// Left eigenvector of a row-stochastic matrix for eigenvalue 1, found by a
/// direct solve of (T^T - I) pi = 0 with one row replaced by sum(pi) = 1.
/// Throws std::domain_error if the chain has no unique stationary distribution.
StationaryDistribution stationary_from_matrix(const Eigen::MatrixXd& transition);

StationaryDistribution stationary_distribution(const Topology& topology,
                                               const TransitionAssignment& theta);

/// max_j |(pi T)_j - pi_j|
double stationarity_residual(const Eigen::MatrixXd& transition,
                             const StationaryDistribution& pi);

/// Entropy rate in bits per symbol.
double entropy_rate(const Topology& topology, const TransitionAssignment& theta,
                    const StationaryDistribution& pi);

/// Shannon entropy of the state distribution, in bits.
double statistical_complexity(const StationaryDistribution& pi);

}  // namespace bsi
