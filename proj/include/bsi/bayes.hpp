#pragma once

// Closed-form Dirichlet evidence and the three-level posterior over
// transition probabilities, start states and topologies.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bsi/machine.hpp"

namespace bsi {

/// Concentration alpha(s x | s0) shared by every edge of every machine.
struct DirichletPrior {
  double alpha = 1.0;
};

/// Pr(M | library) proportional to exp(-beta * n_states(M)); the start-state
/// prior is uniform over a machine's states.
struct ModelPriorSpec {
  double beta = 4.0;
};

/// Numerically stable log(sum(exp(v))); -infinity for an empty input.
double log_sum_exp(std::span<const double> values);

double log_evidence_given_start(const Topology& topology, const EdgeCounts& counts,
                                const DirichletPrior& prior);

/// Posterior mean of p(x|s): (alpha + n(s x)) / (alpha(s .) + n(s .)), and
/// exactly 1 on out-degree-1 states.
TransitionAssignment transition_posterior_mean(const Topology& topology, const EdgeCounts& counts,
                                               const DirichletPrior& prior);

struct StartPosterior {
  State state = 0;
  bool accepted = false;
  double log_evidence = 0.0;  // log Pr(D | s0, M); meaningless when !accepted
  double posterior = 0.0;     // Pr(s0 | D, M)
  EdgeCounts counts;          // empty when !accepted
};

struct ModelEvidence {
  bool accepted = false;
  double log_evidence = 0.0;  // log Pr(D | M)
  std::vector<StartPosterior> starts;
};

/// Traces every start, computes per-start evidence and the start posterior.
ModelEvidence evaluate_model(const Topology& topology, const DataSeries& data,
                             const DirichletPrior& prior);

/// Pr(s0 | D, M) for every state, or nullopt when no start accepts.
std::optional<std::vector<double>> start_state_posterior(const Topology& topology,
                                                         const DataSeries& data,
                                                         const DirichletPrior& prior);

/// log Pr(D | M) averaged over the uniform start prior, or nullopt when no
/// start accepts.
std::optional<double> model_log_evidence(const Topology& topology, const DataSeries& data,
                                         const DirichletPrior& prior);

std::vector<double> model_log_prior(std::span<const Topology> library, const ModelPriorSpec& spec);
std::vector<double> model_prior(std::span<const Topology> library, const ModelPriorSpec& spec);

struct PosteriorRow {
  std::size_t index = 0;  // position in the library
  std::string id;
  int n_states = 0;
  bool accepted = false;
  double log_prior = 0.0;
  double log_evidence = 0.0;
  double posterior = 0.0;  // exactly 0 for rejected rows
  std::vector<StartPosterior> starts;
};

struct PosteriorTable {
  std::vector<PosteriorRow> rows;  // library order
  double log_normalizer = 0.0;    // log Pr(D | library)
  std::size_t data_length = 0;

  std::size_t accepted_count() const;
};

/// Full posterior scan over a library. Rows are evaluated in parallel and
/// stored by library index, so results do not depend on `threads`.
PosteriorTable topology_posterior(std::span<const Topology> library, const DataSeries& data,
                                  const DirichletPrior& prior, const ModelPriorSpec& spec,
                                  unsigned threads = 0);

/// Index into table.rows of the largest posterior; ties go to the least id.
/// Throws NoAcceptingTopology if no row accepts.
std::size_t map_row(const PosteriorTable& table);
std::string map_topology(const PosteriorTable& table);

/// True if some start state has a path for the whole series.
bool accepts(const Topology& topology, const DataSeries& data);

/// Number of machines with at least one accepting start state.
std::size_t accepting_count(std::span<const Topology> library, const DataSeries& data,
                            unsigned threads = 0);

}  // namespace bsi
