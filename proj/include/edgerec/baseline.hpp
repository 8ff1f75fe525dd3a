#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "edgerec/coagent.hpp"

namespace edgerec {

/// Which edge hosts each document slot's computation. The default is one edge
/// per slot; the hub hosts no per-document parameters and is not an edge here.
struct EdgeAssignment {
  std::vector<int> slot_to_edge;

  static EdgeAssignment identity(std::size_t n_slots = 5);

  /// Edge indices must cover 0..max contiguously. Returns the edge count.
  int edge_count() const;
};

/// Round-robin over edges, ascending: episode_index mod n_edges.
int cd_schedule(std::uint64_t episode_index, int n_edges);

/// The coordinate-descent increment: identical arithmetic to
/// reinforce_increment, restricted to records whose slot maps to active_edge.
/// With the identity assignment, summing this over all edges reproduces the
/// full increment bit-for-bit.
ParamMatrix cd_increment(const CoagentLayer& layer,
                         std::span<const ExecutionRecord> records,
                         std::span<const double> returns, int active_edge,
                         const EdgeAssignment& assignment, double alpha,
                         double gamma);

CoagentLayer cd_update(const CoagentLayer& layer,
                       std::span<const ExecutionRecord> records,
                       std::span<const double> returns, int active_edge,
                       const EdgeAssignment& assignment, double alpha, double gamma);

}  // namespace edgerec
