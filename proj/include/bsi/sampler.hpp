#pragma once

// Posterior sampling over (topology, start state, transition probabilities)
// and the summaries used to report h_mu and C_mu.

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bsi/bayes.hpp"
#include "bsi/machine.hpp"

namespace bsi {

enum class SampleMode {
  kFull,  // draw a topology from the posterior on every sample
  kMap,   // fix the MAP topology
};

struct SamplerConfig {
  std::size_t n_samples = 50'000;
  std::uint64_t seed = 0;
  SampleMode mode = SampleMode::kFull;
  unsigned threads = 0;
};

struct PosteriorSample {
  std::size_t row = 0;  // index into PosteriorTable::rows and the library
  std::string topology_id;
  State start_state = 0;
  TransitionAssignment theta;
  StationaryDistribution pi;
  double h_mu = 0.0;
  double c_mu = 0.0;
};

using Rng = std::mt19937_64;

/// Independent generator for one sample index.
Rng sample_rng(std::uint64_t seed, std::uint64_t index);

/// Gamma-normalization draw from Dirichlet(alphas).
std::vector<double> dirichlet_sample(std::span<const double> alphas, Rng& rng);

/// Draws config.n_samples samples. `library` must be the machine list the
/// table was computed from. Throws NoAcceptingTopology if the table has no
/// accepting row. Sample i depends only on (seed, i).
std::vector<PosteriorSample> sample_posterior(std::span<const Topology> library,
                                              const PosteriorTable& table,
                                              const DirichletPrior& prior,
                                              const SamplerConfig& config);

struct SummaryStats {
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t count = 0;
};

/// Quantile with linear interpolation between order statistics at position
/// q * (N - 1).
double quantile(std::span<const double> sorted, double q);

/// Equal-tailed interval from the (1-level)/2 and (1+level)/2 quantiles.
std::pair<double, double> credible_interval(std::span<const double> samples, double level = 0.95);

SummaryStats summarize(std::span<const double> samples, double level = 0.95);

double silverman_bandwidth(std::span<const double> samples);

struct DensityEstimate {
  bool degenerate = false;  // zero spread: no density is produced
  double bandwidth = 0.0;
  std::vector<double> x;
  std::vector<double> density;
};

/// Gaussian KDE on `grid_points` equally spaced points covering
/// [min - 4h, max + 4h]. A non-positive `bandwidth` selects Silverman's rule.
DensityEstimate gaussian_kde(std::span<const double> samples, std::size_t grid_points,
                             double bandwidth = 0.0);

/// Mixture density at x for a fixed bandwidth.
double kde_at(std::span<const double> samples, double bandwidth, double x);

}  // namespace bsi
