#include "bsi/enumeration.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

#include "bsi/errors.hpp"
#include "bsi/parallel.hpp"

namespace bsi {

namespace {

constexpr int kMaxEncodableStates = 64;

char encode_target(State t) { return t == kNoEdge ? '-' : static_cast<char>('0' + t); }
State decode_target(char c) { return c == '-' ? kNoEdge : static_cast<State>(c - '0'); }

// States that can reach `target` along edges.
std::vector<bool> reaches(const Topology& m, State target) {
  const int n = m.n_states(), k = m.alphabet_size();
  std::vector<bool> seen(n, false);
  seen[target] = true;
  bool grew = true;
  while (grew) {
    grew = false;
    for (State s = 0; s < n; ++s) {
      if (seen[s]) continue;
      for (int x = 0; x < k; ++x) {
        const State t = m.next(s, static_cast<Symbol>(x));
        if (t != kNoEdge && seen[t]) {
          seen[s] = true;
          grew = true;
          break;
        }
      }
    }
  }
  return seen;
}

// bfs_encoding over a raw successor table; `labels` and `order` are scratch.
bool bfs_encode(std::span<const State> table, int n, int k, State root,
                std::vector<State>& labels, std::vector<State>& order, std::string& out) {
  labels.assign(n, kNoEdge);
  order.clear();
  labels[root] = 0;
  order.push_back(root);
  for (std::size_t head = 0; head < order.size(); ++head) {
    const State s = order[head];
    for (int x = 0; x < k; ++x) {
      const State t = table[s * k + x];
      if (t != kNoEdge && labels[t] == kNoEdge) {
        labels[t] = static_cast<State>(order.size());
        order.push_back(t);
      }
    }
  }
  if (static_cast<int>(order.size()) != n) return false;
  out.resize(static_cast<std::size_t>(n) * k);
  std::size_t pos = 0;
  for (const State s : order) {
    for (int x = 0; x < k; ++x) {
      const State t = table[s * k + x];
      out[pos++] = encode_target(t == kNoEdge ? kNoEdge : labels[t]);
    }
  }
  return true;
}

// Depth-first generator over successor tables written in BFS normal form
// from root 0: scanning slots in (state, symbol) order, each new state label
// first appears in increasing order, so every table is its own root-0 BFS
// encoding.
class OrderlyGenerator {
 public:
  OrderlyGenerator(int n, int k, std::atomic<std::size_t>& accepted, std::size_t limit)
      : n_(n), k_(k), slots_(n * k), table_(slots_, kNoEdge), accepted_(accepted), limit_(limit) {}

  struct Prefix {
    std::vector<State> table;
    int depth;
    int discovered;
  };

  void collect_prefixes(int depth, std::vector<Prefix>& out) {
    prefix_depth_ = depth;
    prefixes_ = &out;
    search(0, 1);
    prefixes_ = nullptr;
  }

  std::vector<std::string> run(const Prefix& prefix) {
    table_ = prefix.table;
    prefix_depth_ = -1;
    results_.clear();
    search(prefix.depth, prefix.discovered);
    return std::move(results_);
  }

 private:
  void search(int slot, int discovered) {
    if (slot == prefix_depth_) {
      prefixes_->push_back({table_, slot, discovered});
      return;
    }
    if (slot == slots_) {
      if (discovered == n_) finish();
      return;
    }
    const State s = slot / k_;
    const int x = slot % k_;
    if (x == 0 && s >= discovered) return;            // s unreachable from root 0
    if (slots_ - slot < n_ - discovered) return;      // not enough slots left for new labels
    const bool last_of_state = x == k_ - 1;
    auto degree_ok = [&] {
      if (!last_of_state) return true;
      for (int y = 0; y < k_; ++y)
        if (table_[s * k_ + y] != kNoEdge) return true;
      return false;
    };

    table_[slot] = kNoEdge;
    if (degree_ok()) search(slot + 1, discovered);
    for (State t = 0; t < discovered; ++t) {
      table_[slot] = t;
      search(slot + 1, discovered);
    }
    if (discovered < n_) {
      table_[slot] = discovered;
      search(slot + 1, discovered + 1);
    }
    table_[slot] = kNoEdge;
  }

  void finish() {
    // Full alphabet.
    for (int x = 0; x < k_; ++x) {
      bool used = false;
      for (State s = 0; s < n_ && !used; ++s) used = table_[s * k_ + x] != kNoEdge;
      if (!used) return;
    }
    const Topology m("", n_, k_, table_);
    // All states reach root 0 (root 0 reaches all by construction).
    const auto back = reaches(m, 0);
    if (std::find(back.begin(), back.end(), false) != back.end()) return;
    if (!is_minimal_uniform(m)) return;
    // Keep only the least encoding among roots; ties are automorphic.
    std::string own(table_.size(), '-');
    for (std::size_t i = 0; i < table_.size(); ++i) own[i] = encode_target(table_[i]);
    for (State root = 1; root < n_; ++root) {
      bfs_encode(table_, n_, k_, root, labels_, order_, scratch_);
      if (scratch_ < own) return;
    }
    if (accepted_.fetch_add(1) + 1 > limit_) {
      throw CapacityError("enumeration of n=" + std::to_string(n_) + ", k=" +
                          std::to_string(k_) + " exceeds the limit of " +
                          std::to_string(limit_) + " machines");
    }
    results_.push_back(std::move(own));
  }

  int n_, k_, slots_;
  std::vector<State> table_;
  std::atomic<std::size_t>& accepted_;
  std::size_t limit_;
  int prefix_depth_ = -1;
  std::vector<Prefix>* prefixes_ = nullptr;
  std::vector<std::string> results_;
  std::vector<State> labels_, order_;
  std::string scratch_;
};

}  // namespace

bool is_strongly_connected(const Topology& topology) {
  const auto back = reaches(topology, 0);
  if (std::find(back.begin(), back.end(), false) != back.end()) return false;
  std::vector<State> labels, order;
  std::string enc;
  return bfs_encode(topology.successor_table(), topology.n_states(), topology.alphabet_size(), 0,
                    labels, order, enc);
}

bool is_full_alphabet(const Topology& topology) {
  for (int x = 0; x < topology.alphabet_size(); ++x) {
    bool used = false;
    for (State s = 0; s < topology.n_states() && !used; ++s)
      used = topology.has_edge(s, static_cast<Symbol>(x));
    if (!used) return false;
  }
  return true;
}

bool is_minimal_uniform(const Topology& topology) {
  const int n = topology.n_states(), k = topology.alphabet_size();
  // Initial blocks: the set of emitted symbols fixes every p(x|s) = 1/outdeg.
  std::vector<int> block(n);
  {
    std::map<std::vector<bool>, int> ids;
    for (State s = 0; s < n; ++s) {
      std::vector<bool> sig(k);
      for (int x = 0; x < k; ++x) sig[x] = topology.has_edge(s, static_cast<Symbol>(x));
      block[s] = ids.try_emplace(sig, static_cast<int>(ids.size())).first->second;
    }
  }
  int blocks = *std::max_element(block.begin(), block.end()) + 1;
  for (;;) {
    std::map<std::vector<int>, int> ids;
    std::vector<int> refined(n);
    for (State s = 0; s < n; ++s) {
      std::vector<int> key{block[s]};
      for (int x = 0; x < k; ++x) {
        const State t = topology.next(s, static_cast<Symbol>(x));
        key.push_back(t == kNoEdge ? -1 : block[t]);
      }
      refined[s] = ids.try_emplace(std::move(key), static_cast<int>(ids.size())).first->second;
    }
    const int count = static_cast<int>(ids.size());
    block = std::move(refined);
    if (count == blocks) break;
    blocks = count;
  }
  return blocks == n;
}

std::string bfs_encoding(const Topology& topology, State root) {
  std::vector<State> labels, order;
  std::string out;
  if (!bfs_encode(topology.successor_table(), topology.n_states(), topology.alphabet_size(), root,
                  labels, order, out)) {
    return {};
  }
  return out;
}

CanonicalForm canonicalize(const Topology& topology) {
  if (topology.n_states() > kMaxEncodableStates) {
    throw CapacityError("canonical encoding supports at most 64 states");
  }
  if (!is_strongly_connected(topology)) {
    throw InputError("topology '" + topology.id() + "' is not strongly connected");
  }
  std::string best;
  for (State root = 0; root < topology.n_states(); ++root) {
    std::string enc = bfs_encoding(topology, root);
    if (best.empty() || enc < best) best = std::move(enc);
  }
  return {topology_from_encoding(topology.id(), topology.n_states(), topology.alphabet_size(), best),
          best};
}

Topology topology_from_encoding(std::string id, int n_states, int alphabet_size,
                                const std::string& encoding) {
  if (encoding.size() != static_cast<std::size_t>(n_states) * alphabet_size) {
    throw InputError("encoding length does not match n*k");
  }
  std::vector<State> table(encoding.size());
  std::transform(encoding.begin(), encoding.end(), table.begin(), decode_target);
  return Topology(std::move(id), n_states, alphabet_size, std::move(table));
}

std::string canonical_id(int n_states, int alphabet_size, std::size_t index) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "n%dk%dc%05zu", n_states, alphabet_size, index);
  return buf;
}

std::vector<Topology> enumerate_topological_ems(int n_states, int alphabet_size,
                                                const EnumerationOptions& options) {
  if (n_states < 1) throw InputError("state count must be at least 1");
  if (alphabet_size < 2) throw InputError("alphabet size must be at least 2");
  if (n_states > kMaxEncodableStates) {
    throw CapacityError("enumeration supports at most 64 states");
  }

  std::atomic<std::size_t> accepted{0};
  OrderlyGenerator root_gen(n_states, alphabet_size, accepted, options.max_machines);
  std::vector<OrderlyGenerator::Prefix> prefixes;
  root_gen.collect_prefixes(std::min(n_states * alphabet_size, 4), prefixes);

  std::vector<std::vector<std::string>> partial(prefixes.size());
  parallel_for(
      prefixes.size(), options.threads,
      [&](std::size_t i) {
        OrderlyGenerator gen(n_states, alphabet_size, accepted, options.max_machines);
        partial[i] = gen.run(prefixes[i]);
      },
      1);

  std::unordered_set<std::string> seen;
  std::vector<std::string> encodings;
  for (auto& part : partial) {
    for (auto& enc : part) {
      if (seen.insert(enc).second) encodings.push_back(std::move(enc));
    }
  }
  std::sort(encodings.begin(), encodings.end());

  std::vector<Topology> out;
  out.reserve(encodings.size());
  for (std::size_t i = 0; i < encodings.size(); ++i) {
    out.push_back(topology_from_encoding(canonical_id(n_states, alphabet_size, i), n_states,
                                         alphabet_size, encodings[i]));
  }
  return out;
}

bool operator==(const MachineLibrary& a, const MachineLibrary& b) {
  if (a.min_states != b.min_states || a.max_states != b.max_states ||
      a.alphabet_size != b.alphabet_size || a.census != b.census ||
      a.machines.size() != b.machines.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.machines.size(); ++i) {
    if (a.machines[i].id() != b.machines[i].id() ||
        !a.machines[i].same_structure(b.machines[i])) {
      return false;
    }
  }
  return true;
}

MachineLibrary build_library(int min_states, int max_states, int alphabet_size,
                             const EnumerationOptions& options) {
  if (min_states < 1 || max_states < min_states) {
    throw InputError("state range must satisfy 1 <= min <= max");
  }
  MachineLibrary lib;
  lib.min_states = min_states;
  lib.max_states = max_states;
  lib.alphabet_size = alphabet_size;
  lib.census.assign(max_states, 0);
  for (int n = min_states; n <= max_states; ++n) {
    auto machines = enumerate_topological_ems(n, alphabet_size, options);
    lib.census[n - 1] = machines.size();
    for (auto& m : machines) lib.machines.push_back(std::move(m));
  }
  return lib;
}

std::string serialize_library(const MachineLibrary& library) {
  using ojson = nlohmann::ordered_json;
  std::ostringstream out;
  ojson header;
  header["max_states"] = library.max_states;
  header["alphabet_size"] = library.alphabet_size;
  header["census"] = library.census;
  header["min_states"] = library.min_states;
  out << header.dump() << '\n';
  for (const Topology& m : library.machines) {
    ojson line;
    line["id"] = m.id();
    line["n"] = m.n_states();
    line["k"] = m.alphabet_size();
    ojson edges = ojson::array();
    for (const Edge& e : m.edges()) edges.push_back({e.from, static_cast<int>(e.symbol), e.to});
    line["edges"] = std::move(edges);
    out << line.dump() << '\n';
  }
  return out.str();
}

MachineLibrary parse_library(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  MachineLibrary lib;
  bool have_header = false;
  std::unordered_set<std::string> ids;
  std::unordered_set<std::string> structures;
  std::vector<std::size_t> observed;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw InputError("library line " + std::to_string(line_no) + ": " + e.what());
    }
    try {
      if (!have_header) {
        lib.max_states = j.at("max_states").get<int>();
        lib.alphabet_size = j.at("alphabet_size").get<int>();
        lib.census = j.at("census").get<std::vector<std::size_t>>();
        lib.min_states = j.value("min_states", 1);
        if (lib.max_states < 1 || lib.min_states < 1 || lib.min_states > lib.max_states ||
            lib.alphabet_size < 1 || lib.census.size() != static_cast<std::size_t>(lib.max_states)) {
          throw InputError("inconsistent library header");
        }
        observed.assign(lib.max_states, 0);
        have_header = true;
        continue;
      }
      const std::string id = j.at("id").get<std::string>();
      const int n = j.at("n").get<int>();
      const int k = j.at("k").get<int>();
      if (k != lib.alphabet_size) throw InputError("machine alphabet differs from header");
      if (n < lib.min_states || n > lib.max_states) throw InputError("machine size outside header range");
      std::vector<Edge> edges;
      for (const auto& e : j.at("edges")) {
        if (!e.is_array() || e.size() != 3) throw InputError("edge must be [from, symbol, to]");
        const int symbol = e[1].get<int>();
        if (symbol < 0 || symbol >= k) throw InputError("edge symbol out of range");
        edges.push_back({e[0].get<State>(), static_cast<Symbol>(symbol), e[2].get<State>()});
      }
      Topology m = Topology::from_edges(id, n, k, edges);
      if (!ids.insert(id).second) throw InputError("duplicate machine id '" + id + "'");
      if (!structures.insert(canonicalize(m).encoding).second) {
        throw InputError("machine '" + id + "' duplicates an earlier machine's structure");
      }
      ++observed[n - 1];
      lib.machines.push_back(std::move(m));
    } catch (const InputError& e) {
      throw InputError("library line " + std::to_string(line_no) + ": " + e.what());
    } catch (const nlohmann::json::exception& e) {
      throw InputError("library line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header) throw InputError("library file has no header line");
  if (observed != lib.census) throw InputError("library census does not match its machines");
  return lib;
}

void save_library(const MachineLibrary& library, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << serialize_library(library);
  if (!out) throw InputError("failed writing " + path.string());
}

MachineLibrary load_library(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_library(buf.str());
}

}  // namespace bsi
