#include "bsi/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bsi/errors.hpp"
#include "bsi/parallel.hpp"

namespace bsi {

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return -std::numeric_limits<double>::infinity();
  const double top = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(top)) return top;
  double sum = 0.0;
  for (const double v : values) sum += std::exp(v - top);
  return top + std::log(sum);
}

double log_evidence_given_start(const Topology& topology, const EdgeCounts& counts,
                                const DirichletPrior& prior) {
  const int k = topology.alphabet_size();
  const double a = prior.alpha;
  const double lg_a = std::lgamma(a);
  double total = 0.0;
  for (State s = 0; s < topology.n_states(); ++s) {
    const int degree = topology.out_degree(s);
    if (degree < 2) continue;
    const double a_row = a * degree;
    double visits = 0.0;
    double term = std::lgamma(a_row) - degree * lg_a;
    for (int x = 0; x < k; ++x) {
      if (!topology.has_edge(s, static_cast<Symbol>(x))) continue;
      const double c = static_cast<double>(counts(s, static_cast<Symbol>(x)));
      term += std::lgamma(a + c);
      visits += c;
    }
    term -= std::lgamma(a_row + visits);
    total += term;
  }
  return total;
}

TransitionAssignment transition_posterior_mean(const Topology& topology, const EdgeCounts& counts,
                                               const DirichletPrior& prior) {
  const int n = topology.n_states(), k = topology.alphabet_size();
  TransitionAssignment theta(n, k, std::vector<double>(static_cast<std::size_t>(n) * k, 0.0));
  for (State s = 0; s < n; ++s) {
    const int degree = topology.out_degree(s);
    const double denom = prior.alpha * degree + static_cast<double>(counts.visits(s));
    for (int x = 0; x < k; ++x) {
      const auto sym = static_cast<Symbol>(x);
      if (!topology.has_edge(s, sym)) continue;
      theta(s, sym) = degree == 1 ? 1.0 : (prior.alpha + static_cast<double>(counts(s, sym))) / denom;
    }
  }
  return theta;
}

ModelEvidence evaluate_model(const Topology& topology, const DataSeries& data,
                             const DirichletPrior& prior) {
  const int n = topology.n_states();
  const double log_start_prior = -std::log(static_cast<double>(n));
  auto traces = trace_all_starts(topology, data);

  ModelEvidence out;
  out.starts.resize(n);
  std::vector<double> joint;
  joint.reserve(n);
  for (State s = 0; s < n; ++s) {
    StartPosterior& sp = out.starts[s];
    sp.state = s;
    if (!traces[s]) continue;
    sp.accepted = true;
    sp.log_evidence = log_evidence_given_start(topology, *traces[s], prior);
    sp.counts = std::move(*traces[s]);
    joint.push_back(sp.log_evidence + log_start_prior);
  }
  if (joint.empty()) return out;
  out.accepted = true;
  out.log_evidence = log_sum_exp(joint);
  for (auto& sp : out.starts) {
    if (sp.accepted) sp.posterior = std::exp(sp.log_evidence + log_start_prior - out.log_evidence);
  }
  return out;
}

std::optional<std::vector<double>> start_state_posterior(const Topology& topology,
                                                         const DataSeries& data,
                                                         const DirichletPrior& prior) {
  const ModelEvidence ev = evaluate_model(topology, data, prior);
  if (!ev.accepted) return std::nullopt;
  std::vector<double> out(ev.starts.size());
  for (std::size_t s = 0; s < out.size(); ++s) out[s] = ev.starts[s].posterior;
  return out;
}

std::optional<double> model_log_evidence(const Topology& topology, const DataSeries& data,
                                         const DirichletPrior& prior) {
  const ModelEvidence ev = evaluate_model(topology, data, prior);
  if (!ev.accepted) return std::nullopt;
  return ev.log_evidence;
}

std::vector<double> model_log_prior(std::span<const Topology> library, const ModelPriorSpec& spec) {
  if (spec.beta < 0.0) throw InputError("beta must be nonnegative");
  std::vector<double> logw(library.size());
  for (std::size_t i = 0; i < library.size(); ++i) logw[i] = -spec.beta * library[i].n_states();
  const double norm = log_sum_exp(logw);
  for (double& v : logw) v -= norm;
  return logw;
}

std::vector<double> model_prior(std::span<const Topology> library, const ModelPriorSpec& spec) {
  auto p = model_log_prior(library, spec);
  for (double& v : p) v = std::exp(v);
  return p;
}

std::size_t PosteriorTable::accepted_count() const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const PosteriorRow& r) { return r.accepted; }));
}

PosteriorTable topology_posterior(std::span<const Topology> library, const DataSeries& data,
                                  const DirichletPrior& prior, const ModelPriorSpec& spec,
                                  unsigned threads) {
  if (!(prior.alpha > 0.0)) throw InputError("alpha must be positive");
  const auto log_prior = model_log_prior(library, spec);

  PosteriorTable table;
  table.data_length = data.size();
  table.rows.resize(library.size());
  parallel_for(library.size(), threads, [&](std::size_t i) {
    const Topology& m = library[i];
    PosteriorRow& row = table.rows[i];
    row.index = i;
    row.id = m.id();
    row.n_states = m.n_states();
    row.log_prior = log_prior[i];
    ModelEvidence ev = evaluate_model(m, data, prior);
    row.accepted = ev.accepted;
    row.log_evidence = ev.log_evidence;
    row.starts = std::move(ev.starts);
  });

  std::vector<double> joint;
  for (const auto& row : table.rows) {
    if (row.accepted) joint.push_back(row.log_evidence + row.log_prior);
  }
  table.log_normalizer = log_sum_exp(joint);
  for (auto& row : table.rows) {
    row.posterior =
        row.accepted ? std::exp(row.log_evidence + row.log_prior - table.log_normalizer) : 0.0;
  }
  return table;
}

std::size_t map_row(const PosteriorTable& table) {
  std::size_t best = table.rows.size();
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    if (!row.accepted) continue;
    if (best == table.rows.size()) {
      best = i;
      continue;
    }
    // Compare in log space so ties survive the exp.
    const double lhs = row.log_evidence + row.log_prior;
    const double rhs = table.rows[best].log_evidence + table.rows[best].log_prior;
    if (lhs > rhs || (lhs == rhs && row.id < table.rows[best].id)) best = i;
  }
  if (best == table.rows.size()) throw NoAcceptingTopology("no topology accepts the data");
  return best;
}

std::string map_topology(const PosteriorTable& table) { return table.rows[map_row(table)].id; }

bool accepts(const Topology& m, const DataSeries& data) {
  const int k = m.alphabet_size();
  const auto table = m.successor_table();
  std::vector<State> current(m.n_states());
  for (State s = 0; s < m.n_states(); ++s) current[s] = s;
  std::vector<char> occupied(m.n_states());
  for (const Symbol x : data.symbols()) {
    std::fill(occupied.begin(), occupied.end(), 0);
    std::size_t kept = 0;
    for (const State s : current) {
      const State t = table[static_cast<std::size_t>(s) * k + x];
      if (t == kNoEdge || occupied[t]) continue;
      occupied[t] = 1;
      current[kept++] = t;
    }
    current.resize(kept);
    if (current.empty()) return false;
  }
  return true;
}

std::size_t accepting_count(std::span<const Topology> library, const DataSeries& data,
                            unsigned threads) {
  std::vector<char> accepted(library.size(), 0);
  parallel_for(library.size(), threads, [&](std::size_t i) {
    if (data.alphabet_size() != library[i].alphabet_size()) {
      throw InputError("series alphabet does not match the library");
    }
    accepted[i] = accepts(library[i], data);
  });
  return static_cast<std::size_t>(std::count(accepted.begin(), accepted.end(), 1));
}

}  // namespace bsi
