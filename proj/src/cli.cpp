#include "bsi/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "bsi/bayes.hpp"
#include "bsi/enumeration.hpp"
#include "bsi/errors.hpp"
#include "bsi/processes.hpp"
#include "bsi/sampler.hpp"

namespace bsi::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << content;
  if (!out) throw InputError("failed writing " + path.string());
}

std::size_t parse_count(const std::string& token) {
  std::size_t value = 0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (token.rfind("2^", 0) == 0) {
    unsigned exponent = 0;
    const auto res = std::from_chars(first + 2, last, exponent);
    if (res.ec != std::errc{} || res.ptr != last || exponent > 62) {
      throw InputError("bad length '" + token + "'");
    }
    return std::size_t{1} << exponent;
  }
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last) throw InputError("bad length '" + token + "'");
  return value;
}

unsigned resolve_threads(unsigned flag) {
  if (flag != 0) return flag;
  if (const char* env = std::getenv("BSI_THREADS")) {
    unsigned v = 0;
    const std::string s(env);
    if (std::from_chars(s.data(), s.data() + s.size(), v).ec == std::errc{}) return v;
  }
  return 0;
}

DataSeries load_series(const fs::path& path, int alphabet_size) {
  return DataSeries::parse(read_file(path), alphabet_size);
}

struct ScanConfig {
  std::string library;
  std::string data;
  double alpha = 1.0;
  double beta = 4.0;
  std::uint64_t seed = 0;
};

void add_scan_options(CLI::App* cmd, ScanConfig& cfg) {
  cmd->add_option("--library", cfg.library, "Machine library file")->required();
  cmd->add_option("--data", cfg.data, "Symbol series file (ASCII digits)")->required();
  cmd->add_option("--alpha", cfg.alpha, "Dirichlet concentration per edge")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--beta", cfg.beta, "Model-size penalty")->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", cfg.seed, "Random seed");
}

ojson report_json(const PosteriorTable& table, const ScanConfig& cfg, int alphabet_size,
                  std::size_t top) {
  ojson report;
  report["data"] = {{"length", table.data_length}, {"alphabet_size", alphabet_size}};
  report["config"] = {{"alpha", cfg.alpha}, {"beta", cfg.beta}, {"seed", cfg.seed}};
  report["library_size"] = table.rows.size();
  report["accepting_count"] = table.accepted_count();

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    if (table.rows[i].accepted) order.push_back(i);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ra = table.rows[a];
    const auto& rb = table.rows[b];
    const double la = ra.log_evidence + ra.log_prior;
    const double lb = rb.log_evidence + rb.log_prior;
    return la != lb ? la > lb : ra.id < rb.id;
  });

  ojson rows = ojson::array();
  double tail = 0.0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    const auto& row = table.rows[order[r]];
    if (r >= top) {
      tail += row.posterior;
      continue;
    }
    ojson starts = ojson::array();
    for (const auto& s : row.starts) starts.push_back(s.posterior);
    rows.push_back({{"id", row.id},
                    {"n_states", row.n_states},
                    {"log_evidence", row.log_evidence},
                    {"posterior", row.posterior},
                    {"start_posterior", std::move(starts)}});
  }
  report["top"] = std::move(rows);
  report["tail_mass"] = tail;
  if (order.empty()) {
    report["log_evidence_library"] = nullptr;
    report["map"] = nullptr;
  } else {
    report["log_evidence_library"] = table.log_normalizer;
    const auto& best = table.rows[map_row(table)];
    report["map"] = {{"id", best.id}, {"posterior", best.posterior}};
  }
  return report;
}

std::string samples_csv(const std::vector<PosteriorSample>& samples) {
  std::string out = "index,topology_id,start_state,h_mu,c_mu\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    out += std::to_string(i) + ',' + s.topology_id + ',' + std::to_string(s.start_state) + ',' +
           format_double(s.h_mu) + ',' + format_double(s.c_mu) + '\n';
  }
  return out;
}

ojson summary_json(const SummaryStats& s) {
  return {{"mean", s.mean}, {"ci_low", s.ci_low}, {"ci_high", s.ci_high}, {"count", s.count}};
}

std::pair<SummaryStats, SummaryStats> summarize_samples(const std::vector<PosteriorSample>& samples) {
  std::vector<double> h, c;
  h.reserve(samples.size());
  c.reserve(samples.size());
  for (const auto& s : samples) {
    h.push_back(s.h_mu);
    c.push_back(s.c_mu);
  }
  return {summarize(h), summarize(c)};
}

SampleMode parse_mode(const std::string& mode) {
  return mode == "map" ? SampleMode::kMap : SampleMode::kFull;
}

// Column of a sample CSV by header name.
std::vector<double> read_column(const fs::path& path, std::string column) {
  if (column == "hmu") column = "h_mu";
  if (column == "cmu") column = "c_mu";
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw InputError(path.string() + " is empty");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  const auto it = std::find(header.begin(), header.end(), column);
  if (it == header.end()) throw InputError("column '" + column + "' not found in " + path.string());
  const auto index = static_cast<std::size_t>(it - header.begin());
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    for (std::size_t c = 0; c <= index; ++c) {
      if (!std::getline(ss, cell, ',')) {
        throw InputError("line " + std::to_string(line_no) + " has too few columns");
      }
    }
    double v = 0.0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size()) {
      throw InputError("line " + std::to_string(line_no) + ": bad number '" + cell + "'");
    }
    values.push_back(v);
  }
  return values;
}

}  // namespace

std::vector<std::size_t> parse_lengths(const std::string& spec) {
  std::vector<std::size_t> out;
  std::stringstream ss(spec);
  std::string token;
  while (std::getline(ss, token, ',')) {
    token.erase(std::remove_if(token.begin(), token.end(), ::isspace), token.end());
    const auto dots = token.find("..");
    if (dots == std::string::npos) {
      out.push_back(parse_count(token));
      continue;
    }
    const std::string lo = token.substr(0, dots), hi = token.substr(dots + 2);
    if (lo.rfind("2^", 0) != 0 || hi.rfind("2^", 0) != 0) {
      throw InputError("length ranges must be written 2^a..2^b");
    }
    const std::size_t a = parse_count(lo), b = parse_count(hi);
    if (a > b) throw InputError("empty length range '" + token + "'");
    for (std::size_t v = a; v <= b; v *= 2) out.push_back(v);
  }
  if (out.empty()) throw InputError("no lengths given");
  return out;
}

std::pair<int, int> parse_state_range(const std::string& spec) {
  auto parse_int = [&](const std::string& s) {
    int v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
      throw InputError("bad state range '" + spec + "'");
    }
    return v;
  };
  const auto dots = spec.find("..");
  const int lo = parse_int(dots == std::string::npos ? spec : spec.substr(0, dots));
  const int hi = dots == std::string::npos ? lo : parse_int(spec.substr(dots + 2));
  if (lo < 1 || hi < lo) throw InputError("state range must satisfy 1 <= A <= B");
  return {lo, hi};
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian structural inference over topological epsilon-machines", "bsi"};
  app.require_subcommand(1);
  unsigned threads_flag = 0;
  app.add_option("--threads", threads_flag, "Worker threads (0 = BSI_THREADS or all cores)");

  // enumerate
  std::string states_spec = "1..5";
  int alphabet = 2;
  std::string library_out;
  auto* enumerate = app.add_subcommand("enumerate", "Build a topological epsilon-machine library");
  enumerate->add_option("--states", states_spec, "State range A..B")->required();
  enumerate->add_option("--alphabet", alphabet, "Alphabet size")->check(CLI::Range(2, 10));
  enumerate->add_option("--out", library_out, "Library output path")->required();

  // generate
  std::string process;
  std::string length_spec;
  std::uint64_t gen_seed = 0;
  int pinned_start = -1;
  std::string series_out;
  auto* generate = app.add_subcommand("generate", "Simulate a symbol series");
  generate->add_option("--process", process, "golden-mean | even | sns | file:PATH")->required();
  generate->add_option("--length", length_spec, "Series length (N or 2^i)")->required();
  generate->add_option("--seed", gen_seed, "Random seed");
  generate->add_option("--start", pinned_start, "Pin the start state (default: stationary draw)");
  generate->add_option("--out", series_out, "Output path")->required();

  // infer
  ScanConfig infer_cfg;
  std::size_t top = 10;
  std::string report_out;
  auto* infer = app.add_subcommand("infer", "Posterior over library topologies");
  add_scan_options(infer, infer_cfg);
  infer->add_option("--top", top, "Rows to list in the report");
  infer->add_option("--out", report_out, "Report path (default: stdout)");

  // sample
  ScanConfig sample_cfg;
  std::size_t n_samples = 50'000;
  std::string mode = "full";
  std::string samples_out, summary_out;
  auto* sample = app.add_subcommand("sample", "Draw posterior samples of h_mu and C_mu");
  add_scan_options(sample, sample_cfg);
  sample->add_option("--samples", n_samples, "Number of samples");
  sample->add_option("--mode", mode, "full | map")->check(CLI::IsMember({"full", "map"}));
  sample->add_option("--out", samples_out, "Sample CSV path")->required();
  sample->add_option("--summary", summary_out, "Summary JSON path");

  // converge
  ScanConfig conv_cfg;
  std::string lengths = "2^0..2^17";
  std::size_t conv_samples = 50'000;
  std::string conv_mode = "full";
  std::string conv_dir;
  auto* converge = app.add_subcommand("converge", "Subsample convergence over prefixes of one series");
  add_scan_options(converge, conv_cfg);
  converge->add_option("--lengths", lengths, "Prefix lengths, e.g. 2^0..2^17");
  converge->add_option("--samples", conv_samples, "Samples per length");
  converge->add_option("--mode", conv_mode, "full | map")->check(CLI::IsMember({"full", "map"}));
  converge->add_option("--out", conv_dir, "Output directory")->required();

  // density
  std::string density_in, column, bandwidth = "silverman", density_out;
  std::size_t grid = 512;
  auto* density = app.add_subcommand("density", "Gaussian kernel density of a sample column");
  density->add_option("--input", density_in, "Sample CSV")->required();
  density->add_option("--column", column, "h_mu | c_mu")->required();
  density->add_option("--grid", grid, "Grid points")->check(CLI::Range(2, 1'000'000));
  density->add_option("--bandwidth", bandwidth, "silverman or a positive number");
  density->add_option("--out", density_out, "Density CSV path")->required();

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  const unsigned threads = resolve_threads(threads_flag);
  try {
    if (*enumerate) {
      std::pair<int, int> range;
      try {
        range = parse_state_range(states_spec);
      } catch (const InputError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
      }
      const auto [lo, hi] = range;
      EnumerationOptions opts;
      opts.threads = threads;
      const MachineLibrary lib = build_library(lo, hi, alphabet, opts);
      save_library(lib, library_out);
      for (int n = lo; n <= hi; ++n) out << "n=" << n << " machines=" << lib.census[n - 1] << '\n';
      out << "total=" << lib.size() << '\n';
      return kOk;
    }

    if (*generate) {
      std::size_t length = 0;
      try {
        length = parse_count(length_spec);
      } catch (const InputError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
      }
      const GeneratorHMM hmm = process.rfind("file:", 0) == 0 ? load_generator(process.substr(5))
                                                              : builtin_process(process);
      std::optional<State> start;
      if (pinned_start >= 0) start = pinned_start;
      const DataSeries series = generate_series(hmm, length, gen_seed, start);
      write_file(series_out, series.empty() ? std::string() : series.to_string() + '\n');
      return kOk;
    }

    if (*infer) {
      const MachineLibrary lib = load_library(infer_cfg.library);
      const DataSeries data = load_series(infer_cfg.data, lib.alphabet_size);
      const PosteriorTable table = topology_posterior(lib.machines, data, {infer_cfg.alpha},
                                                      {infer_cfg.beta}, threads);
      const std::string text = report_json(table, infer_cfg, lib.alphabet_size, top).dump(2) + '\n';
      if (report_out.empty()) {
        out << text;
      } else {
        write_file(report_out, text);
      }
      if (table.accepted_count() == 0) {
        err << "no topology in the library accepts the data\n";
        return kNoAcceptingTopology;
      }
      const auto& best = table.rows[map_row(table)];
      err << "accepting=" << table.accepted_count() << " map=" << best.id
          << " posterior=" << format_double(best.posterior) << '\n';
      return kOk;
    }

    if (*sample) {
      const MachineLibrary lib = load_library(sample_cfg.library);
      const DataSeries data = load_series(sample_cfg.data, lib.alphabet_size);
      const PosteriorTable table = topology_posterior(lib.machines, data, {sample_cfg.alpha},
                                                      {sample_cfg.beta}, threads);
      if (table.accepted_count() == 0) {
        err << "no topology in the library accepts the data\n";
        return kNoAcceptingTopology;
      }
      SamplerConfig cfg{n_samples, sample_cfg.seed, parse_mode(mode), threads};
      const auto samples = sample_posterior(lib.machines, table, {sample_cfg.alpha}, cfg);
      write_file(samples_out, samples_csv(samples));
      if (!summary_out.empty()) {
        const auto [h, c] = summarize_samples(samples);
        ojson summary;
        summary["data_length"] = data.size();
        summary["mode"] = mode;
        summary["samples"] = samples.size();
        summary["seed"] = sample_cfg.seed;
        summary["h_mu"] = summary_json(h);
        summary["c_mu"] = summary_json(c);
        write_file(summary_out, summary.dump(2) + '\n');
      }
      return kOk;
    }

    if (*converge) {
      std::vector<std::size_t> ls;
      try {
        ls = parse_lengths(lengths);
      } catch (const InputError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
      }
      const MachineLibrary lib = load_library(conv_cfg.library);
      const DataSeries data = load_series(conv_cfg.data, lib.alphabet_size);
      for (const std::size_t L : ls) {
        if (L > data.size()) {
          throw InputError("requested length " + std::to_string(L) + " exceeds the series length " +
                           std::to_string(data.size()));
        }
      }
      const fs::path dir(conv_dir);
      fs::create_directories(dir);
      std::string csv =
          "L,h_mu_mean,h_mu_ci_low,h_mu_ci_high,c_mu_mean,c_mu_ci_low,c_mu_ci_high,map_id,"
          "map_posterior,accepting_count\n";
      for (const std::size_t L : ls) {
        const DataSeries prefix = data.prefix(L);
        const PosteriorTable table =
            topology_posterior(lib.machines, prefix, {conv_cfg.alpha}, {conv_cfg.beta}, threads);
        write_file(dir / ("report_L" + std::to_string(L) + ".json"),
                   report_json(table, conv_cfg, lib.alphabet_size, 10).dump(2) + '\n');
        if (table.accepted_count() == 0) {
          err << "no topology accepts the prefix of length " << L << '\n';
          write_file(dir / "summary.csv", csv);
          return kNoAcceptingTopology;
        }
        SamplerConfig cfg{conv_samples, conv_cfg.seed, parse_mode(conv_mode), threads};
        const auto samples = sample_posterior(lib.machines, table, {conv_cfg.alpha}, cfg);
        const auto [h, c] = summarize_samples(samples);
        const auto& best = table.rows[map_row(table)];
        csv += std::to_string(L) + ',' + format_double(h.mean) + ',' + format_double(h.ci_low) +
               ',' + format_double(h.ci_high) + ',' + format_double(c.mean) + ',' +
               format_double(c.ci_low) + ',' + format_double(c.ci_high) + ',' + best.id + ',' +
               format_double(best.posterior) + ',' + std::to_string(table.accepted_count()) + '\n';
        out << "L=" << L << " map=" << best.id << " posterior=" << format_double(best.posterior)
            << " h_mu=" << format_double(h.mean) << " c_mu=" << format_double(c.mean) << '\n';
      }
      write_file(dir / "summary.csv", csv);
      return kOk;
    }

    if (*density) {
      const auto values = read_column(density_in, column);
      if (values.empty()) throw InputError("column '" + column + "' has no values");
      double h = 0.0;
      if (bandwidth != "silverman") {
        const auto res = std::from_chars(bandwidth.data(), bandwidth.data() + bandwidth.size(), h);
        if (res.ec != std::errc{} || res.ptr != bandwidth.data() + bandwidth.size() || !(h > 0.0)) {
          err << "--bandwidth must be 'silverman' or a positive number\n";
          return kUsage;
        }
      }
      const DensityEstimate est = gaussian_kde(values, grid, h);
      if (est.degenerate) {
        write_file(density_out, "x,density\n# degenerate," + format_double(values.front()) + '\n');
        err << "degenerate distribution: all samples equal " << format_double(values.front())
            << "; no density written\n";
        return kOk;
      }
      std::string csv = "x,density\n";
      for (std::size_t i = 0; i < est.x.size(); ++i) {
        csv += format_double(est.x[i]) + ',' + format_double(est.density[i]) + '\n';
      }
      write_file(density_out, csv);
      return kOk;
    }
  } catch (const NoAcceptingTopology& e) {
    err << "error: " << e.what() << '\n';
    return kNoAcceptingTopology;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kMalformedInput;
  } catch (const CapacityError& e) {
    err << "error: " << e.what() << '\n';
    return kMalformedInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}

}  // namespace bsi::cli
