#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"

#include "bsi/errors.hpp"
#include "bsi/processes.hpp"
#include "bsi/sampler.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace bsi;

namespace {

const DirichletPrior kUniform{1.0};

double trapezoid(const DensityEstimate& d) {
  double sum = 0.0;
  for (std::size_t i = 1; i < d.x.size(); ++i)
    sum += 0.5 * (d.density[i] + d.density[i - 1]) * (d.x[i] - d.x[i - 1]);
  return sum;
}

std::vector<double> column(const std::vector<PosteriorSample>& s, double PosteriorSample::*field) {
  std::vector<double> out;
  for (const auto& v : s) out.push_back(v.*field);
  return out;
}

}  // namespace

TEST_SUITE("sampler") {

TEST_CASE("dirichlet draws") {
  Rng rng = sample_rng(1, 0);
  const std::vector<double> flat{1.0, 1.0};
  double mean = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const auto d = dirichlet_sample(flat, rng);
    REQUIRE(std::abs(d[0] + d[1] - 1.0) <= 1e-12);
    REQUIRE(d[0] > 0.0);
    mean += d[0];
  }
  CHECK(std::abs(mean / 100000 - 0.5) <= 0.005);

  const std::vector<double> tight{1e6, 1e6};
  for (int i = 0; i < 1000; ++i) {
    const auto d = dirichlet_sample(tight, rng);
    REQUIRE(std::abs(d[0] - 0.5) <= 0.01);
  }

  const std::vector<double> three{0.5, 2.0, 7.0};
  for (int i = 0; i < 1000; ++i) {
    const auto d = dirichlet_sample(three, rng);
    REQUIRE(std::abs(d[0] + d[1] + d[2] - 1.0) <= 1e-12);
  }
  const std::vector<double> bad{1.0, 0.0};
  CHECK_THROWS(dirichlet_sample(bad, rng));
}

TEST_CASE("per-index generators are independent of order") {
  Rng a = sample_rng(9, 3);
  Rng b = sample_rng(9, 3);
  CHECK(a() == b());
  CHECK(sample_rng(9, 3)() != sample_rng(9, 4)());
  CHECK(sample_rng(9, 3)() != sample_rng(10, 3)());
}

TEST_CASE("credible intervals") {
  const std::vector<double> constant(50, 0.7);
  const auto [cl, ch] = credible_interval(constant);
  CHECK(cl == 0.7);
  CHECK(ch == 0.7);

  const std::size_t n = 1000;
  std::vector<double> grid(n + 1);
  for (std::size_t i = 0; i <= n; ++i) grid[i] = static_cast<double>(i) / n;
  const auto [gl, gh] = credible_interval(grid);
  CHECK(std::abs(gl - 0.025) <= 1.0 / n);
  CHECK(std::abs(gh - 0.975) <= 1.0 / n);

  // Beta(2, 2) as a Dirichlet(2, 2) marginal, against the analytic quantiles.
  Rng rng = sample_rng(2, 0);
  const std::vector<double> alphas{2.0, 2.0};
  std::vector<double> beta(100000);
  for (double& v : beta) v = dirichlet_sample(alphas, rng)[0];
  const auto [bl, bh] = credible_interval(beta);
  CHECK(std::abs(bl - oracle::beta22_quantile(0.025)) <= 0.01);
  CHECK(std::abs(bh - oracle::beta22_quantile(0.975)) <= 0.01);

  const std::vector<double> three{3.0, 1.0, 2.0};
  std::vector<double> sorted{1.0, 2.0, 3.0};
  CHECK(quantile(sorted, 0.25) == 1.5);
  const auto s = summarize(three);
  CHECK(s.mean == 2.0);
  CHECK(s.count == 3);
  CHECK(s.ci_low <= s.ci_high);
  CHECK(summarize({}).count == 0);
}

TEST_CASE("kernel density estimates") {
  SUBCASE("a single sample gives one bump") {
    const std::vector<double> one{0.3};
    const auto d = gaussian_kde(one, 512, 0.05);
    CHECK_FALSE(d.degenerate);
    CHECK(trapezoid(d) == doctest::Approx(1.0).epsilon(1e-2));
    const auto peak = std::max_element(d.density.begin(), d.density.end()) - d.density.begin();
    CHECK(std::abs(d.x[peak] - 0.3) <= 0.01);
  }
  SUBCASE("all-equal samples are degenerate") {
    const std::vector<double> same(100, 1.0);
    CHECK(gaussian_kde(same, 512).degenerate);
  }
  SUBCASE("two clusters give two maxima") {
    std::vector<double> v;
    for (int i = 0; i < 50; ++i) {
      v.push_back(0.0 + 0.01 * i / 50);
      v.push_back(10.0 + 0.01 * i / 50);
    }
    const auto d = gaussian_kde(v, 2048, 0.5);
    int maxima = 0;
    for (std::size_t i = 1; i + 1 < d.density.size(); ++i)
      if (d.density[i] > d.density[i - 1] && d.density[i] >= d.density[i + 1]) ++maxima;
    CHECK(maxima == 2);
    CHECK(trapezoid(d) == doctest::Approx(1.0).epsilon(1e-2));
    // Grid values match the untruncated mixture.
    for (std::size_t i = 0; i < d.x.size(); i += 97)
      CHECK(d.density[i] == doctest::Approx(kde_at(v, 0.5, d.x[i])).epsilon(1e-9));
  }
  SUBCASE("silverman bandwidth on a normal sample") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z(2.0, 0.5);
    std::vector<double> v(20000);
    for (double& x : v) x = z(rng);
    const double h = silverman_bandwidth(v);
    CHECK(h == doctest::Approx(1.06 * 0.5 * std::pow(20000.0, -0.2)).epsilon(0.03));
    const auto d = gaussian_kde(v, 512);
    CHECK(d.bandwidth == h);
    CHECK(trapezoid(d) == doctest::Approx(1.0).epsilon(1e-2));
    for (const double y : d.density) REQUIRE(y >= 0.0);
  }
}

TEST_CASE("sampler edge cases") {
  const std::vector<Topology> lib{fixtures::even(), fixtures::golden_mean()};
  const auto table = topology_posterior(lib, fixtures::series("1101"), kUniform, {4.0});
  SamplerConfig cfg;
  cfg.n_samples = 0;
  CHECK(sample_posterior(lib, table, kUniform, cfg).empty());

  const auto none = topology_posterior(lib, fixtures::series("00100"), kUniform, {4.0});
  cfg.n_samples = 10;
  CHECK_THROWS_AS(sample_posterior(lib, none, kUniform, cfg), NoAcceptingTopology);
  cfg.mode = SampleMode::kMap;
  CHECK_THROWS_AS(sample_posterior(lib, none, kUniform, cfg), NoAcceptingTopology);
}

TEST_CASE("samples respect the machine invariants and are reproducible") {
  const auto& lib = fixtures::full_library();
  const auto data = generate_series(builtin_process("sns"), 64, 77);
  const auto table = topology_posterior(lib.machines, data, kUniform, {1.0});
  SamplerConfig cfg;
  cfg.n_samples = 5000;
  cfg.seed = 123;
  cfg.threads = 1;
  const auto a = sample_posterior(lib.machines, table, kUniform, cfg);
  cfg.threads = 4;
  const auto b = sample_posterior(lib.machines, table, kUniform, cfg);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& s = a[i];
    REQUIRE(s.topology_id == b[i].topology_id);
    REQUIRE(s.start_state == b[i].start_state);
    REQUIRE(s.h_mu == b[i].h_mu);
    REQUIRE(s.c_mu == b[i].c_mu);
    const Topology& m = lib.machines[s.row];
    REQUIRE(s.topology_id == m.id());
    REQUIRE(s.theta.max_row_error() <= 1e-12);
    REQUIRE(s.theta.valid_for(m));
    REQUIRE(stationarity_residual(state_transition_matrix(m, s.theta), s.pi) <= 1e-10);
    REQUIRE(s.h_mu >= 0.0);
    REQUIRE(s.h_mu <= 1.0 + 1e-12);
    REQUIRE(s.c_mu >= 0.0);
    REQUIRE(s.c_mu <= std::log2(5.0) + 1e-12);
    REQUIRE(table.rows[s.row].starts[s.start_state].accepted);
  }
}

TEST_CASE("prior samples reproduce the prior") {
  const auto& lib = fixtures::full_library();
  const DataSeries empty({}, 2);
  SamplerConfig cfg;
  cfg.n_samples = 50000;
  cfg.seed = 5;

  const auto t4 = topology_posterior(lib.machines, empty, kUniform, {4.0});
  const auto s4 = sample_posterior(lib.machines, t4, kUniform, cfg);
  std::size_t small = 0;
  for (const auto& s : s4) small += lib.machines[s.row].n_states() <= 2;
  CHECK(std::abs(static_cast<double>(small) / cfg.n_samples - 0.9668736590552705) <= 0.01);

  // Flat prior: state-count bins against the census, chi-square with 4 dof.
  const auto t0 = topology_posterior(lib.machines, empty, kUniform, {0.0});
  const auto s0 = sample_posterior(lib.machines, t0, kUniform, cfg);
  std::vector<double> observed(5, 0.0);
  for (const auto& s : s0) observed[lib.machines[s.row].n_states() - 1] += 1.0;
  double chi2 = 0.0;
  for (int n = 0; n < 5; ++n) {
    const double expected = cfg.n_samples * static_cast<double>(lib.census[n]) / lib.size();
    chi2 += (observed[n] - expected) * (observed[n] - expected) / expected;
  }
  CHECK(chi2 < 18.47);  // 0.999 quantile
}

TEST_CASE("Even process transition parameter concentrates at one half") {
  const auto data = generate_series(builtin_process("even"), 1 << 14, 2024);
  const std::vector<Topology> lib{fixtures::even()};
  const auto table = topology_posterior(lib, data, kUniform, {4.0});
  SamplerConfig cfg;
  cfg.n_samples = 20000;
  cfg.seed = 8;
  cfg.mode = SampleMode::kMap;
  const auto samples = sample_posterior(lib, table, kUniform, cfg);
  std::vector<double> p0;
  for (const auto& s : samples) p0.push_back(s.theta(0, 0));
  const auto [lo, hi] = credible_interval(p0);
  CHECK(lo < 0.5);
  CHECK(hi > 0.5);
  CHECK(hi - lo < 0.05);
}

TEST_CASE("full and MAP modes agree when the posterior is concentrated") {
  const auto& lib = fixtures::full_library();
  const auto data = generate_series(builtin_process("even"), 1 << 14, 99);
  const auto table = topology_posterior(lib.machines, data, kUniform, {4.0});
  REQUIRE(table.rows[map_row(table)].posterior > 0.9999);
  SamplerConfig cfg;
  cfg.n_samples = 20000;
  cfg.seed = 31;
  const auto full = sample_posterior(lib.machines, table, kUniform, cfg);
  cfg.mode = SampleMode::kMap;
  cfg.seed = 32;
  const auto map = sample_posterior(lib.machines, table, kUniform, cfg);
  const auto hf = column(full, &PosteriorSample::h_mu);
  const auto hm = column(map, &PosteriorSample::h_mu);
  const auto sf = summarize(hf), sm = summarize(hm);
  double var = 0.0;
  for (const double v : hm) var += (v - sm.mean) * (v - sm.mean);
  var /= hm.size() - 1;
  const double se = std::sqrt(2.0 * var / hm.size());
  CHECK(std::abs(sf.mean - sm.mean) <= 3.0 * se);
}

}  // TEST_SUITE
