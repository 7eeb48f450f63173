#include "bsi/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "bsi/errors.hpp"
#include "bsi/parallel.hpp"

namespace bsi {

Rng sample_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

std::vector<double> dirichlet_sample(std::span<const double> alphas, Rng& rng) {
  std::vector<double> out(alphas.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 0.0)) throw std::invalid_argument("Dirichlet parameters must be positive");
    std::gamma_distribution<double> gamma(alphas[i], 1.0);
    // Redraw exact zeros (possible only for tiny alphas) so every component is positive.
    do {
      out[i] = gamma(rng);
    } while (out[i] == 0.0);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

namespace {

// Inverse-CDF draw from nonnegative weights.
std::size_t draw_index(std::span<const double> cumulative, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, cumulative.back());
  const double u = unit(rng);
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()),
                               cumulative.size() - 1);
}

}  // namespace

std::vector<PosteriorSample> sample_posterior(std::span<const Topology> library,
                                              const PosteriorTable& table,
                                              const DirichletPrior& prior,
                                              const SamplerConfig& config) {
  if (library.size() != table.rows.size()) {
    throw std::invalid_argument("posterior table does not match the library");
  }
  std::vector<std::size_t> candidates;
  std::vector<double> cumulative;
  if (config.mode == SampleMode::kMap) {
    candidates.push_back(map_row(table));
    cumulative.push_back(1.0);
  } else {
    double acc = 0.0;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      if (!table.rows[i].accepted || table.rows[i].posterior <= 0.0) continue;
      acc += table.rows[i].posterior;
      candidates.push_back(i);
      cumulative.push_back(acc);
    }
    if (candidates.empty()) throw NoAcceptingTopology("no topology accepts the data");
  }

  std::vector<PosteriorSample> samples(config.n_samples);
  parallel_for(config.n_samples, config.threads, [&](std::size_t index) {
    Rng rng = sample_rng(config.seed, index);
    PosteriorSample& out = samples[index];
    out.row = candidates[draw_index(cumulative, rng)];
    const PosteriorRow& row = table.rows[out.row];
    const Topology& m = library[out.row];
    out.topology_id = m.id();

    std::vector<double> start_cdf(row.starts.size());
    double acc = 0.0;
    for (std::size_t s = 0; s < row.starts.size(); ++s) {
      acc += row.starts[s].accepted ? row.starts[s].posterior : 0.0;
      start_cdf[s] = acc;
    }
    out.start_state = static_cast<State>(draw_index(start_cdf, rng));
    const EdgeCounts& counts = row.starts[out.start_state].counts;

    const int n = m.n_states(), k = m.alphabet_size();
    TransitionAssignment theta(n, k, std::vector<double>(static_cast<std::size_t>(n) * k, 0.0));
    std::vector<double> alphas;
    std::vector<Symbol> symbols;
    for (State s = 0; s < n; ++s) {
      alphas.clear();
      symbols.clear();
      for (int x = 0; x < k; ++x) {
        const auto sym = static_cast<Symbol>(x);
        if (!m.has_edge(s, sym)) continue;
        symbols.push_back(sym);
        alphas.push_back(prior.alpha + static_cast<double>(counts(s, sym)));
      }
      if (symbols.size() == 1) {
        theta(s, symbols.front()) = 1.0;
        continue;
      }
      const auto draw = dirichlet_sample(alphas, rng);
      for (std::size_t j = 0; j < symbols.size(); ++j) theta(s, symbols[j]) = draw[j];
    }
    out.pi = stationary_distribution(m, theta);
    out.h_mu = entropy_rate(m, theta, out.pi);
    out.c_mu = statistical_complexity(out.pi);
    out.theta = std::move(theta);
  }, 256);
  return samples;
}

double quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::pair<double, double> credible_interval(std::span<const double> samples, double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must be in (0, 1)");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double tail = (1.0 - level) / 2.0;
  return {quantile(sorted, tail), quantile(sorted, 1.0 - tail)};
}

SummaryStats summarize(std::span<const double> samples, double level) {
  SummaryStats out;
  out.count = samples.size();
  if (samples.empty()) return out;
  out.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
  std::tie(out.ci_low, out.ci_high) = credible_interval(samples, level);
  return out;
}

double silverman_bandwidth(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 2) return 0.0;
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (const double v : samples) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  return 1.06 * sd * std::pow(static_cast<double>(n), -0.2);
}

double kde_at(std::span<const double> samples, double bandwidth, double x) {
  const double norm = 1.0 / (static_cast<double>(samples.size()) * bandwidth *
                             std::sqrt(2.0 * std::numbers::pi));
  double sum = 0.0;
  for (const double s : samples) {
    const double z = (x - s) / bandwidth;
    sum += std::exp(-0.5 * z * z);
  }
  return norm * sum;
}

DensityEstimate gaussian_kde(std::span<const double> samples, std::size_t grid_points,
                             double bandwidth) {
  if (samples.empty()) throw std::invalid_argument("density of an empty sample");
  if (grid_points < 2) throw std::invalid_argument("grid needs at least two points");
  DensityEstimate out;
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *lo_it, hi = *hi_it;
  if (samples.size() > 1 && lo == hi) {
    out.degenerate = true;
    return out;
  }
  out.bandwidth = bandwidth > 0.0 ? bandwidth : silverman_bandwidth(samples);
  if (!(out.bandwidth > 0.0)) {
    out.degenerate = true;
    return out;
  }
  const double start = lo - 4.0 * out.bandwidth;
  const double stop = hi + 4.0 * out.bandwidth;
  const double step = (stop - start) / static_cast<double>(grid_points - 1);

  // Kernels are truncated at 8 bandwidths.
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double reach = 8.0 * out.bandwidth;
  const double norm = 1.0 / (static_cast<double>(sorted.size()) * out.bandwidth *
                             std::sqrt(2.0 * std::numbers::pi));
  out.x.resize(grid_points);
  out.density.resize(grid_points);
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double x = start + step * static_cast<double>(i);
    const auto first = std::lower_bound(sorted.begin(), sorted.end(), x - reach);
    const auto last = std::upper_bound(first, sorted.end(), x + reach);
    double sum = 0.0;
    for (auto it = first; it != last; ++it) {
      const double z = (x - *it) / out.bandwidth;
      sum += std::exp(-0.5 * z * z);
    }
    out.x[i] = x;
    out.density[i] = norm * sum;
  }
  return out;
}

}  // namespace bsi
