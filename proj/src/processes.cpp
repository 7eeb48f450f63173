#include "bsi/processes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

#include "bsi/errors.hpp"

namespace bsi {

GeneratorHMM::GeneratorHMM(std::string name, int n_states, int alphabet_size,
                           std::vector<WeightedEdge> edges)
    : name_(std::move(name)), n_states_(n_states), alphabet_size_(alphabet_size), edges_(std::move(edges)) {
  if (n_states_ < 1 || alphabet_size_ < 1) throw InputError("generator needs states and symbols");
  std::vector<double> rows(n_states_, 0.0);
  for (const auto& e : edges_) {
    if (e.from < 0 || e.from >= n_states_ || e.to < 0 || e.to >= n_states_ ||
        e.symbol >= alphabet_size_) {
      throw InputError("generator '" + name_ + "' has an edge out of range");
    }
    if (!(e.p > 0.0 && e.p <= 1.0)) {
      throw InputError("generator '" + name_ + "' has an edge probability outside (0, 1]");
    }
    rows[e.from] += e.p;
  }
  for (int s = 0; s < n_states_; ++s) {
    if (std::abs(rows[s] - 1.0) > 1e-12) {
      throw InputError("outgoing probabilities of state " + std::to_string(s) + " in '" + name_ +
                       "' do not sum to 1");
    }
  }
  // Strong connectivity: every state reaches and is reached from state 0.
  auto closure = [&](bool forward) {
    std::vector<bool> seen(n_states_, false);
    seen[0] = true;
    for (bool grew = true; grew;) {
      grew = false;
      for (const auto& e : edges_) {
        const State a = forward ? e.from : e.to;
        const State b = forward ? e.to : e.from;
        if (seen[a] && !seen[b]) seen[b] = grew = true;
      }
    }
    return std::find(seen.begin(), seen.end(), false) == seen.end();
  };
  if (!closure(true) || !closure(false)) {
    throw InputError("generator '" + name_ + "' is not strongly connected");
  }
}

bool GeneratorHMM::is_unifilar() const {
  std::vector<bool> used(static_cast<std::size_t>(n_states_) * alphabet_size_, false);
  for (const auto& e : edges_) {
    const std::size_t slot = static_cast<std::size_t>(e.from) * alphabet_size_ + e.symbol;
    if (used[slot]) return false;
    used[slot] = true;
  }
  return true;
}

Eigen::MatrixXd GeneratorHMM::transition_matrix() const {
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n_states_, n_states_);
  for (const auto& e : edges_) T(e.from, e.to) += e.p;
  return T;
}

StationaryDistribution GeneratorHMM::stationary() const {
  return stationary_from_matrix(transition_matrix());
}

std::vector<double> GeneratorHMM::symbol_probabilities() const {
  const auto pi = stationary();
  std::vector<double> out(alphabet_size_, 0.0);
  for (const auto& e : edges_) out[e.symbol] += pi.probs[e.from] * e.p;
  return out;
}

std::pair<Topology, TransitionAssignment> GeneratorHMM::as_unifilar() const {
  if (!is_unifilar()) throw InputError("generator '" + name_ + "' is not unifilar");
  std::vector<Edge> plain;
  std::vector<double> probs(static_cast<std::size_t>(n_states_) * alphabet_size_, 0.0);
  for (const auto& e : edges_) {
    plain.push_back({e.from, e.symbol, e.to});
    probs[e.from * alphabet_size_ + e.symbol] = e.p;
  }
  return {Topology::from_edges(name_, n_states_, alphabet_size_, plain),
          TransitionAssignment(n_states_, alphabet_size_, std::move(probs))};
}

GeneratorHMM builtin_process(std::string_view name) {
  // States: A = 0, B = 1.
  if (name == "golden-mean") {
    return GeneratorHMM("golden-mean", 2, 2, {{0, 1, 0, 0.5}, {0, 0, 1, 0.5}, {1, 1, 0, 1.0}});
  }
  if (name == "even") {
    return GeneratorHMM("even", 2, 2, {{0, 0, 0, 0.5}, {0, 1, 1, 0.5}, {1, 1, 0, 1.0}});
  }
  if (name == "sns") {
    return GeneratorHMM("sns", 2, 2,
                        {{0, 1, 0, 0.5}, {0, 1, 1, 0.5}, {1, 1, 1, 0.5}, {1, 0, 0, 0.5}});
  }
  throw InputError("unknown process '" + std::string(name) + "' (expected golden-mean, even or sns)");
}

GeneratorHMM parse_generator(const std::string& json_text) {
  try {
    const auto j = nlohmann::json::parse(json_text);
    std::vector<WeightedEdge> edges;
    const int k = j.at("k").get<int>();
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 4) throw InputError("edge must be [from, symbol, to, p]");
      const int symbol = e[1].get<int>();
      if (symbol < 0 || symbol >= k) throw InputError("edge symbol out of range");
      edges.push_back({e[0].get<State>(), static_cast<Symbol>(symbol), e[2].get<State>(),
                       e[3].get<double>()});
    }
    return GeneratorHMM(j.value("id", std::string("user")), j.at("n").get<int>(), k, std::move(edges));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("generator file: ") + e.what());
  }
}

GeneratorHMM load_generator(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_generator(buf.str());
}

DataSeries generate_series(const GeneratorHMM& hmm, std::size_t length, std::uint64_t seed,
                           std::optional<State> start) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<const WeightedEdge*>> out_edges(hmm.n_states());
  for (const auto& e : hmm.edges()) out_edges[e.from].push_back(&e);

  State state;
  if (start) {
    if (*start < 0 || *start >= hmm.n_states()) throw InputError("pinned start state out of range");
    state = *start;
  } else {
    const auto pi = hmm.stationary();
    std::discrete_distribution<State> pick(pi.probs.begin(), pi.probs.end());
    state = pick(rng);
  }

  std::vector<std::discrete_distribution<std::size_t>> choose;
  choose.reserve(hmm.n_states());
  for (const auto& edges : out_edges) {
    std::vector<double> w;
    for (const auto* e : edges) w.push_back(e->p);
    choose.emplace_back(w.begin(), w.end());
  }

  std::vector<Symbol> symbols(length);
  for (std::size_t t = 0; t < length; ++t) {
    const WeightedEdge* e = out_edges[state][choose[state](rng)];
    symbols[t] = e->symbol;
    state = e->to;
  }
  return DataSeries(std::move(symbols), hmm.alphabet_size());
}

}  // namespace bsi
