#include "edgerec/baseline.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace edgerec {

EdgeAssignment EdgeAssignment::identity(std::size_t n_slots) {
  EdgeAssignment assignment;
  assignment.slot_to_edge.resize(n_slots);
  std::iota(assignment.slot_to_edge.begin(), assignment.slot_to_edge.end(), 0);
  return assignment;
}

int EdgeAssignment::edge_count() const {
  if (slot_to_edge.empty())
    throw std::invalid_argument("EdgeAssignment: no slots mapped");
  const int max_edge = *std::max_element(slot_to_edge.begin(), slot_to_edge.end());
  std::vector<bool> present(static_cast<std::size_t>(max_edge) + 1, false);
  for (const int e : slot_to_edge) {
    if (e < 0) throw std::invalid_argument("EdgeAssignment: negative edge index");
    present[static_cast<std::size_t>(e)] = true;
  }
  if (std::find(present.begin(), present.end(), false) != present.end())
    throw std::invalid_argument("EdgeAssignment: edge indices must be contiguous from 0");
  return max_edge + 1;
}

int cd_schedule(std::uint64_t episode_index, int n_edges) {
  if (n_edges < 1) throw std::invalid_argument("cd_schedule: need at least one edge");
  return static_cast<int>(episode_index % static_cast<std::uint64_t>(n_edges));
}

ParamMatrix cd_increment(const CoagentLayer& layer,
                         std::span<const ExecutionRecord> records,
                         std::span<const double> returns, int active_edge,
                         const EdgeAssignment& assignment, double alpha,
                         double gamma) {
  const int n_edges = assignment.edge_count();
  if (active_edge < 0 || active_edge >= n_edges)
    throw std::invalid_argument("cd_increment: active edge " +
                                std::to_string(active_edge) + " out of range");

  std::vector<ExecutionRecord> filtered;
  filtered.reserve(records.size());
  for (const ExecutionRecord& rec : records) {
    if (rec.slot < 0 || static_cast<std::size_t>(rec.slot) >= assignment.slot_to_edge.size())
      throw std::invalid_argument("cd_increment: record slot " +
                                  std::to_string(rec.slot) + " has no edge assigned");
    if (assignment.slot_to_edge[static_cast<std::size_t>(rec.slot)] == active_edge)
      filtered.push_back(rec);
  }
  return reinforce_increment(layer, filtered, returns, alpha, gamma);
}

CoagentLayer cd_update(const CoagentLayer& layer,
                       std::span<const ExecutionRecord> records,
                       std::span<const double> returns, int active_edge,
                       const EdgeAssignment& assignment, double alpha, double gamma) {
  return apply_increment(
      layer, cd_increment(layer, records, returns, active_edge, assignment, alpha, gamma));
}

}  // namespace edgerec
