#include "bsi/machine.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "bsi/errors.hpp"

namespace bsi {

// ---------------------------------------------------------------------------
// DataSeries

DataSeries::DataSeries(std::vector<Symbol> symbols, int alphabet_size)
    : symbols_(std::move(symbols)), alphabet_size_(alphabet_size) {
  if (alphabet_size < 1) throw InputError("alphabet size must be positive");
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    if (symbols_[i] >= alphabet_size) {
      throw InputError("symbol " + std::to_string(symbols_[i]) + " at position " +
                       std::to_string(i) + " is outside the alphabet of size " +
                       std::to_string(alphabet_size));
    }
  }
}

DataSeries DataSeries::parse(std::string_view text, int alphabet_size) {
  if (alphabet_size < 1 || alphabet_size > 10) {
    throw InputError("text series support alphabets of size 1..10");
  }
  std::vector<Symbol> symbols;
  symbols.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) continue;
    if (!std::isdigit(c)) {
      throw InputError("unexpected character '" + std::string(1, text[i]) +
                       "' at offset " + std::to_string(i));
    }
    symbols.push_back(static_cast<Symbol>(c - '0'));
  }
  return DataSeries(std::move(symbols), alphabet_size);
}

DataSeries DataSeries::prefix(std::size_t length) const {
  DataSeries out;
  out.alphabet_size_ = alphabet_size_;
  out.symbols_.assign(symbols_.begin(),
                      symbols_.begin() + std::min(length, symbols_.size()));
  return out;
}

std::string DataSeries::to_string() const {
  std::string s(symbols_.size(), '0');
  for (std::size_t i = 0; i < symbols_.size(); ++i) s[i] = static_cast<char>('0' + symbols_[i]);
  return s;
}

// ---------------------------------------------------------------------------
// Topology

Topology::Topology(std::string id, int n_states, int alphabet_size,
                   std::vector<State> successors)
    : id_(std::move(id)),
      n_states_(n_states),
      alphabet_size_(alphabet_size),
      successors_(std::move(successors)) {
  if (n_states < 1) throw InputError("topology needs at least one state");
  if (alphabet_size < 1) throw InputError("alphabet size must be positive");
  if (successors_.size() != static_cast<std::size_t>(n_states) * alphabet_size) {
    throw InputError("successor table has the wrong size");
  }
  for (State t : successors_) {
    if (t != kNoEdge && (t < 0 || t >= n_states)) {
      throw InputError("edge target out of range in topology '" + id_ + "'");
    }
  }
  for (State s = 0; s < n_states; ++s) {
    if (out_degree(s) == 0) {
      throw InputError("state " + std::to_string(s) + " of topology '" + id_ +
                       "' has no outgoing edge");
    }
  }
}

Topology Topology::from_edges(std::string id, int n_states, int alphabet_size,
                              std::span<const Edge> edges) {
  if (n_states < 1 || alphabet_size < 1) throw InputError("bad topology dimensions");
  std::vector<State> table(static_cast<std::size_t>(n_states) * alphabet_size, kNoEdge);
  for (const Edge& e : edges) {
    if (e.from < 0 || e.from >= n_states || e.to < 0 || e.to >= n_states ||
        e.symbol >= alphabet_size) {
      throw InputError("edge out of range in topology '" + id + "'");
    }
    State& slot = table[e.from * alphabet_size + e.symbol];
    if (slot != kNoEdge) {
      throw InputError("topology '" + id + "' is not unifilar: state " +
                       std::to_string(e.from) + " has two edges for symbol " +
                       std::to_string(e.symbol));
    }
    slot = e.to;
  }
  return Topology(std::move(id), n_states, alphabet_size, std::move(table));
}

int Topology::out_degree(State s) const {
  int d = 0;
  for (int x = 0; x < alphabet_size_; ++x) d += successors_[s * alphabet_size_ + x] != kNoEdge;
  return d;
}

std::size_t Topology::edge_count() const {
  return static_cast<std::size_t>(
      std::count_if(successors_.begin(), successors_.end(), [](State t) { return t != kNoEdge; }));
}

std::vector<Edge> Topology::edges() const {
  std::vector<Edge> out;
  for (State s = 0; s < n_states_; ++s) {
    for (int x = 0; x < alphabet_size_; ++x) {
      const State t = next(s, static_cast<Symbol>(x));
      if (t != kNoEdge) out.push_back({s, static_cast<Symbol>(x), t});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// TransitionAssignment

TransitionAssignment TransitionAssignment::uniform(const Topology& topology) {
  const int n = topology.n_states(), k = topology.alphabet_size();
  std::vector<double> probs(static_cast<std::size_t>(n) * k, 0.0);
  for (State s = 0; s < n; ++s) {
    const double p = 1.0 / topology.out_degree(s);
    for (int x = 0; x < k; ++x) {
      if (topology.has_edge(s, static_cast<Symbol>(x))) probs[s * k + x] = p;
    }
  }
  return TransitionAssignment(n, k, std::move(probs));
}

double TransitionAssignment::max_row_error() const {
  double worst = 0.0;
  for (int s = 0; s < n_states_; ++s) {
    double sum = 0.0;
    for (int x = 0; x < alphabet_size_; ++x) sum += probs_[s * alphabet_size_ + x];
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

bool TransitionAssignment::valid_for(const Topology& topology, double tolerance) const {
  if (n_states_ != topology.n_states() || alphabet_size_ != topology.alphabet_size()) return false;
  for (State s = 0; s < n_states_; ++s) {
    const bool single = topology.out_degree(s) == 1;
    for (int x = 0; x < alphabet_size_; ++x) {
      const double p = (*this)(s, static_cast<Symbol>(x));
      if (!topology.has_edge(s, static_cast<Symbol>(x))) {
        if (p != 0.0) return false;
      } else if (!(p > 0.0 && p <= 1.0) || (single && p != 1.0)) {
        return false;
      }
    }
  }
  return max_row_error() <= tolerance;
}

// ---------------------------------------------------------------------------
// Path tracing

std::uint64_t EdgeCounts::visits(State s) const {
  std::uint64_t v = 0;
  for (int x = 0; x < alphabet_size; ++x) v += counts[s * alphabet_size + x];
  return v;
}

std::uint64_t EdgeCounts::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

namespace {

void check_trace_inputs(const Topology& topology, const DataSeries& data) {
  if (data.alphabet_size() != topology.alphabet_size()) {
    throw InputError("series alphabet size " + std::to_string(data.alphabet_size()) +
                     " does not match topology alphabet size " +
                     std::to_string(topology.alphabet_size()));
  }
}

// Walks a single path from `state` over symbols [from, end). Returns false on
// a missing edge.
bool walk(std::span<const State> table, int k, State state,
          std::span<const Symbol> symbols, std::uint64_t* counts) {
  for (const Symbol x : symbols) {
    const std::size_t slot = static_cast<std::size_t>(state) * k + x;
    const State next = table[slot];
    if (next == kNoEdge) return false;
    ++counts[slot];
    state = next;
  }
  return true;
}

}  // namespace

std::optional<EdgeCounts> trace_path(const Topology& topology, State start,
                                     const DataSeries& data) {
  check_trace_inputs(topology, data);
  if (start < 0 || start >= topology.n_states()) {
    throw InputError("start state " + std::to_string(start) + " out of range");
  }
  EdgeCounts out{start, topology.n_states(), topology.alphabet_size(),
                 std::vector<std::uint64_t>(topology.successor_table().size(), 0)};
  if (!walk(topology.successor_table(), topology.alphabet_size(), start, data.symbols(),
            out.counts.data())) {
    return std::nullopt;
  }
  return out;
}

std::vector<std::optional<EdgeCounts>> trace_all_starts(const Topology& topology,
                                                        const DataSeries& data) {
  check_trace_inputs(topology, data);
  const int n = topology.n_states();
  const int k = topology.alphabet_size();
  const std::size_t width = static_cast<std::size_t>(n) * k;
  const auto table = topology.successor_table();
  const auto symbols = data.symbols();

  std::vector<std::uint64_t> counts(width * n, 0);
  std::vector<State> current(n);
  std::iota(current.begin(), current.end(), 0);
  std::vector<bool> dead(n, false);
  // Live path representatives; a path that reaches the same state as a
  // representative at the same time becomes its follower.
  std::vector<State> reps(n);
  std::iota(reps.begin(), reps.end(), 0);

  struct Merge {
    State follower;
    State leader;
    std::vector<std::uint64_t> leader_snapshot;
  };
  std::vector<Merge> merges;
  std::vector<State> owner(n, -1);

  std::size_t t = 0;
  for (; t < symbols.size() && reps.size() > 1; ++t) {
    const Symbol x = symbols[t];
    std::size_t kept = 0;
    for (const State r : reps) {
      const std::size_t slot = static_cast<std::size_t>(current[r]) * k + x;
      const State next = table[slot];
      if (next == kNoEdge) {
        dead[r] = true;
        continue;
      }
      ++counts[r * width + slot];
      current[r] = next;
      reps[kept++] = r;
    }
    reps.resize(kept);
    // reps stays sorted ascending, so the lowest-index path leads each merge.
    for (const State r : reps) owner[current[r]] = -1;
    kept = 0;
    for (const State r : reps) {
      State& o = owner[current[r]];
      if (o == -1) {
        o = r;
        reps[kept++] = r;
      } else {
        merges.push_back({r, o, std::vector<std::uint64_t>(
                                    counts.begin() + o * width,
                                    counts.begin() + (o + 1) * width)});
      }
    }
    reps.resize(kept);
  }
  if (reps.size() == 1 && t < symbols.size()) {
    const State r = reps.front();
    if (!walk(table, k, current[r], symbols.subspan(t), counts.data() + r * width)) {
      dead[r] = true;
    }
  }

  // Followers inherit the leader's suffix; later merges resolve first.
  for (auto it = merges.rbegin(); it != merges.rend(); ++it) {
    dead[it->follower] = dead[it->leader];
    if (dead[it->follower]) continue;
    for (std::size_t j = 0; j < width; ++j) {
      counts[it->follower * width + j] += counts[it->leader * width + j] - it->leader_snapshot[j];
    }
  }

  std::vector<std::optional<EdgeCounts>> out(n);
  for (State s = 0; s < n; ++s) {
    if (dead[s]) continue;
    out[s] = EdgeCounts{s, n, k,
                        std::vector<std::uint64_t>(counts.begin() + s * width,
                                                   counts.begin() + (s + 1) * width)};
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stationary distribution and information measures

Eigen::MatrixXd state_transition_matrix(const Topology& topology,
                                        const TransitionAssignment& theta) {
  const int n = topology.n_states();
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
  for (const Edge& e : topology.edges()) T(e.from, e.to) += theta(e.from, e.symbol);
  return T;
}

StationaryDistribution stationary_from_matrix(const Eigen::MatrixXd& transition) {
  const Eigen::Index n = transition.rows();
  if (n == 0 || transition.cols() != n) throw std::domain_error("transition matrix must be square");
  Eigen::MatrixXd A = transition.transpose() - Eigen::MatrixXd::Identity(n, n);
  A.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible()) {
    throw std::domain_error("chain has no unique stationary distribution");
  }
  Eigen::VectorXd pi = lu.solve(b);
  // Clamp round-off below zero and renormalize.
  pi = pi.cwiseMax(0.0);
  pi /= pi.sum();
  return {std::vector<double>(pi.data(), pi.data() + n)};
}

StationaryDistribution stationary_distribution(const Topology& topology,
                                               const TransitionAssignment& theta) {
  return stationary_from_matrix(state_transition_matrix(topology, theta));
}

double stationarity_residual(const Eigen::MatrixXd& transition,
                             const StationaryDistribution& pi) {
  const Eigen::Map<const Eigen::RowVectorXd> row(pi.probs.data(),
                                                 static_cast<Eigen::Index>(pi.probs.size()));
  return (row * transition - row).cwiseAbs().maxCoeff();
}

double entropy_rate(const Topology& topology, const TransitionAssignment& theta,
                    const StationaryDistribution& pi) {
  double h = 0.0;
  for (State s = 0; s < topology.n_states(); ++s) {
    double row = 0.0;
    for (int x = 0; x < topology.alphabet_size(); ++x) {
      const double p = theta(s, static_cast<Symbol>(x));
      if (p > 0.0 && p < 1.0) row -= p * std::log2(p);
    }
    h += pi.probs[s] * row;
  }
  return std::max(h, 0.0);
}

double statistical_complexity(const StationaryDistribution& pi) {
  double c = 0.0;
  for (const double p : pi.probs) {
    if (p > 0.0 && p < 1.0) c -= p * std::log2(p);
  }
  return std::max(c, 0.0);
}

}  // namespace bsi
