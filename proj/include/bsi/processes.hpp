#pragma once

// Reference generators: Golden Mean, Even, Simple Nonunifilar Source, and
// user-supplied (possibly nonunifilar) HMMs.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "bsi/machine.hpp"

namespace bsi {

struct WeightedEdge {
  State from;
  Symbol symbol;
  State to;
  double p;
};

/// Edge-labeled HMM used only to generate data; unifilarity is not required.
class GeneratorHMM {
 public:
  GeneratorHMM() = default;
  /// Throws InputError unless every row sums to 1 within 1e-12, probabilities
  /// lie in (0, 1], and the state graph is strongly connected.
  GeneratorHMM(std::string name, int n_states, int alphabet_size, std::vector<WeightedEdge> edges);

  const std::string& name() const { return name_; }
  int n_states() const { return n_states_; }
  int alphabet_size() const { return alphabet_size_; }
  const std::vector<WeightedEdge>& edges() const { return edges_; }

  bool is_unifilar() const;
  Eigen::MatrixXd transition_matrix() const;
  StationaryDistribution stationary() const;
  /// Pr(X_t = x) under the stationary distribution.
  std::vector<double> symbol_probabilities() const;

  /// The edge structure as a Topology (unifilar generators only) together
  /// with its probabilities.
  std::pair<Topology, TransitionAssignment> as_unifilar() const;

 private:
  std::string name_;
  int n_states_ = 0;
  int alphabet_size_ = 0;
  std::vector<WeightedEdge> edges_;
};

/// "golden-mean", "even" or "sns"; throws InputError otherwise.
GeneratorHMM builtin_process(std::string_view name);

/// One JSON object {"id", "n", "k", "edges": [[from, symbol, to, p], ...]}.
GeneratorHMM parse_generator(const std::string& json_text);
GeneratorHMM load_generator(const std::filesystem::path& path);

/// Seeded simulation. The start state is drawn from the stationary
/// distribution unless pinned.
DataSeries generate_series(const GeneratorHMM& hmm, std::size_t length, std::uint64_t seed,
                           std::optional<State> start = std::nullopt);

}  // namespace bsi
