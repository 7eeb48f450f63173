#pragma once

#include <vector>

#include "bsi/enumeration.hpp"
#include "bsi/machine.hpp"

namespace bsi::fixtures {

// State A = 0, B = 1 throughout.

inline Topology iid() {
  const std::vector<Edge> e{{0, 0, 0}, {0, 1, 0}};
  return Topology::from_edges("iid", 1, 2, e);
}

inline Topology golden_mean() {
  const std::vector<Edge> e{{0, 0, 1}, {0, 1, 0}, {1, 1, 0}};
  return Topology::from_edges("golden-mean", 2, 2, e);
}

inline Topology even() {
  const std::vector<Edge> e{{0, 0, 0}, {0, 1, 1}, {1, 1, 0}};
  return Topology::from_edges("even", 2, 2, e);
}

// A -0-> A, A -1-> B, B -0-> B, B -1-> A.
inline Topology swap_on_one() {
  const std::vector<Edge> e{{0, 0, 0}, {0, 1, 1}, {1, 0, 1}, {1, 1, 0}};
  return Topology::from_edges("swap-on-one", 2, 2, e);
}

// A -0-> A, A -1-> B, B -0-> A, B -1-> A: the IID process when p(0|A) = p(0|B).
inline Topology redundant_iid() {
  const std::vector<Edge> e{{0, 0, 0}, {0, 1, 1}, {1, 0, 0}, {1, 1, 0}};
  return Topology::from_edges("redundant-iid", 2, 2, e);
}

inline Topology two_cycle() {
  const std::vector<Edge> e{{0, 1, 1}, {1, 0, 0}};
  return Topology::from_edges("two-cycle", 2, 2, e);
}

inline DataSeries series(const char* digits, int k = 2) { return DataSeries::parse(digits, k); }

/// The binary 1..5-state library, built once per test process.
inline const MachineLibrary& full_library() {
  static const MachineLibrary lib = build_library(1, 5, 2);
  return lib;
}

}  // namespace bsi::fixtures
