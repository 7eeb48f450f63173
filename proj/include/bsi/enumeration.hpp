#pragma once

// Exact enumeration of topological epsilon-machines up to state relabeling,
// plus the line-oriented JSON library format.

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "bsi/machine.hpp"

namespace bsi {

/// Breadth-first canonical form of a strongly connected topology.
struct CanonicalForm {
  Topology topology;
  /// n*k characters in (state, symbol) order: '-' for a missing edge,
  /// '0' + target otherwise.
  std::string encoding;
};

/// Every state reaches every other state.
bool is_strongly_connected(const Topology& topology);

/// Every symbol labels at least one edge.
bool is_full_alphabet(const Topology& topology);

/// True iff no two states are probabilistically equivalent when each state's
/// outgoing edges are equally likely. Moore-style refinement: blocks start
/// from the set of emitted symbols and split on successor blocks.
bool is_minimal_uniform(const Topology& topology);

/// BFS relabeling from `root`, expanding edges in symbol order. Returns an
/// empty string if some state is unreachable from `root`.
std::string bfs_encoding(const Topology& topology, State root);

/// Lexicographically least BFS encoding over all roots. Throws InputError for
/// topologies that are not strongly connected. The returned topology keeps
/// the input id.
CanonicalForm canonicalize(const Topology& topology);

/// Rebuilds a topology from a canonical encoding.
Topology topology_from_encoding(std::string id, int n_states, int alphabet_size,
                                const std::string& encoding);

std::string canonical_id(int n_states, int alphabet_size, std::size_t index);

struct EnumerationOptions {
  unsigned threads = 0;
  /// CapacityError once more machines than this are accepted for one n.
  std::size_t max_machines = 20'000'000;
};

/// All topological epsilon-machines with exactly `n_states` states over an
/// alphabet of `alphabet_size` symbols, one per isomorphism class, sorted by
/// canonical encoding and labelled "n{n}k{k}c{index}".
std::vector<Topology> enumerate_topological_ems(int n_states, int alphabet_size,
                                                const EnumerationOptions& options = {});

struct MachineLibrary {
  int min_states = 1;
  int max_states = 0;
  int alphabet_size = 2;
  /// census[n - 1] = number of machines with n states.
  std::vector<std::size_t> census;
  std::vector<Topology> machines;

  std::size_t size() const { return machines.size(); }
  friend bool operator==(const MachineLibrary& a, const MachineLibrary& b);
};

MachineLibrary build_library(int min_states, int max_states, int alphabet_size,
                             const EnumerationOptions& options = {});

/// Header line {"max_states", "alphabet_size", "census", "min_states"}, then
/// one {"id", "n", "k", "edges"} object per line with edges sorted by
/// (from, symbol).
std::string serialize_library(const MachineLibrary& library);
MachineLibrary parse_library(const std::string& text);

void save_library(const MachineLibrary& library, const std::filesystem::path& path);
/// Throws InputError on malformed lines, census mismatches or duplicate ids
/// or structures.
MachineLibrary load_library(const std::filesystem::path& path);

}  // namespace bsi
