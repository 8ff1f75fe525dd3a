#include <doctest.h>

#include <vector>

#include "edgerec/baseline.hpp"
#include "edgerec/sim.hpp"

using namespace edgerec;

namespace {

// Random trace-like record sets over 5 slots and 5 timesteps.
struct FakeTrace {
  std::vector<std::vector<double>> inputs;  // owns the feature storage
  std::vector<ExecutionRecord> records;
  std::vector<double> returns;
};

FakeTrace make_fake_trace(const CoagentLayer& layer, Rng& rng, int n_steps = 5) {
  FakeTrace trace;
  // Feature storage first, so record spans stay stable.
  std::vector<std::pair<int, int>> cells;  // (time, slot) with an available doc
  for (int t = 0; t < n_steps; ++t)
    for (std::size_t s = 0; s < kSlateSize; ++s) {
      if (rng.bernoulli(0.25)) continue;  // this slot dropped out
      std::vector<double> input;
      for (std::size_t j = 0; j < layer.feature_dim(); ++j)
        input.push_back(rng.uniform(-1.0, 1.0));
      trace.inputs.push_back(std::move(input));
      cells.emplace_back(t, static_cast<int>(s));
    }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto [time, slot] = cells[i];
    for (std::size_t u = 0; u < layer.unit_count(); ++u) {
      const double sigma = coagent_action_probability(layer.unit(u), trace.inputs[i]);
      const int action = rng.bernoulli(sigma) ? 1 : 0;
      trace.records.push_back(ExecutionRecord{static_cast<int>(u), slot, time,
                                              trace.inputs[i], action,
                                              action == 1 ? sigma : 1.0 - sigma});
    }
  }
  for (int t = 0; t < n_steps; ++t) trace.returns.push_back(rng.uniform(-2.0, 5.0));
  return trace;
}

bool matrices_identical(const ParamMatrix& a, const ParamMatrix& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t u = 0; u < a.size(); ++u)
    if (a[u] != b[u]) return false;
  return true;
}

}  // namespace

TEST_SUITE("baseline") {

TEST_CASE("cd_schedule loops over edges in ascending order") {
  CHECK(cd_schedule(0, 5) == 0);
  CHECK(cd_schedule(7, 5) == 2);
  CHECK(cd_schedule(5, 5) == 0);
  CHECK(cd_schedule(123456789012ULL, 5) == static_cast<int>(123456789012ULL % 5));
  CHECK_THROWS_AS(cd_schedule(0, 0), std::invalid_argument);
}

TEST_CASE("edge assignments must be contiguous") {
  CHECK(EdgeAssignment::identity().edge_count() == 5);
  EdgeAssignment skip{{0, 2, 2, 2, 2}};  // edge 1 missing
  CHECK_THROWS_AS(skip.edge_count(), std::invalid_argument);
  EdgeAssignment negative{{0, -1, 1, 1, 1}};
  CHECK_THROWS_AS(negative.edge_count(), std::invalid_argument);
  CHECK_THROWS_AS(EdgeAssignment{}.edge_count(), std::invalid_argument);
}

TEST_CASE("records on other edges leave the layer unchanged") {
  Rng rng(31);
  const CoagentLayer layer = CoagentLayer::init_uniform(8, 3, 0.01, rng);
  const std::vector<double> input = {0.2, -0.4, 0.6};
  const std::vector<ExecutionRecord> records = {{1, 0, 0, input, 1, 0.5},
                                                {3, 2, 0, input, 0, 0.5}};
  const std::vector<double> returns = {1.5};
  const CoagentLayer updated =
      cd_update(layer, records, returns, 4, EdgeAssignment::identity(), 0.1, 1.0);
  CHECK(updated == layer);
}

TEST_CASE("a single-edge assignment reproduces the full update") {
  Rng rng(32);
  const CoagentLayer layer = CoagentLayer::init_uniform(8, 3, 0.01, rng);
  const FakeTrace trace = make_fake_trace(layer, rng);
  EdgeAssignment single;
  single.slot_to_edge.assign(kSlateSize, 0);

  const CoagentLayer via_cd =
      cd_update(layer, trace.records, trace.returns, 0, single, 0.05, 1.0);
  const CoagentLayer via_full =
      reinforce_update(layer, trace.records, trace.returns, 0.05, 1.0);
  CHECK(via_cd == via_full);
}

TEST_CASE("cd restricted to one slot equals reinforce on the filtered records") {
  Rng rng(33);
  const CoagentLayer layer = CoagentLayer::init_uniform(8, 3, 0.01, rng);
  const FakeTrace trace = make_fake_trace(layer, rng);

  std::vector<ExecutionRecord> slot2;
  for (const ExecutionRecord& rec : trace.records)
    if (rec.slot == 2) slot2.push_back(rec);

  const ParamMatrix via_cd = cd_increment(layer, trace.records, trace.returns, 2,
                                          EdgeAssignment::identity(), 0.05, 0.9);
  const ParamMatrix direct = reinforce_increment(layer, slot2, trace.returns, 0.05, 0.9);
  CHECK(matrices_identical(via_cd, direct));
}

TEST_CASE("summed cd increments equal the full increment bit-for-bit") {
  Rng rng(34);
  const EdgeAssignment assignment = EdgeAssignment::identity();
  for (int trial = 0; trial < 25; ++trial) {
    const CoagentLayer layer = CoagentLayer::init_uniform(8, 3, 0.05, rng);
    const FakeTrace trace = make_fake_trace(layer, rng);

    ParamMatrix summed = zero_param_matrix(layer.unit_count(), layer.feature_dim());
    for (int edge = 0; edge < assignment.edge_count(); ++edge)
      add_param_matrix(summed, cd_increment(layer, trace.records, trace.returns, edge,
                                            assignment, 0.02, 1.0));
    const ParamMatrix full =
        reinforce_increment(layer, trace.records, trace.returns, 0.02, 1.0);
    CHECK(matrices_identical(summed, full));
    CHECK(apply_increment(layer, summed) ==
          reinforce_update(layer, trace.records, trace.returns, 0.02, 1.0));
  }
}

TEST_CASE("decomposition holds to rounding for grouped assignments") {
  Rng rng(35);
  const CoagentLayer layer = CoagentLayer::init_uniform(8, 3, 0.05, rng);
  const FakeTrace trace = make_fake_trace(layer, rng);
  EdgeAssignment grouped{{0, 1, 0, 1, 1}};  // two edges hosting several slots

  ParamMatrix summed = zero_param_matrix(layer.unit_count(), layer.feature_dim());
  for (int edge = 0; edge < grouped.edge_count(); ++edge)
    add_param_matrix(summed, cd_increment(layer, trace.records, trace.returns, edge,
                                          grouped, 0.02, 1.0));
  const ParamMatrix full =
      reinforce_increment(layer, trace.records, trace.returns, 0.02, 1.0);
  for (std::size_t u = 0; u < full.size(); ++u)
    for (std::size_t j = 0; j < full[u].size(); ++j)
      CHECK(summed[u][j] == doctest::Approx(full[u][j]).epsilon(1e-12));
}

TEST_CASE("the baseline shares the coagent policy exactly") {
  Rng init(36);
  const CoagentLayer layer = CoagentLayer::init_uniform(32, 2, 0.01, init);
  const std::vector<std::vector<double>> features(5, std::vector<double>{0.3, -0.7});
  std::vector<std::span<const double>> spans(features.begin(), features.end());
  const std::vector<bool> mask(5, true);

  Rng r1(100), r2(100);
  std::vector<ExecutionRecord> rec1, rec2;
  const VoteVector v1 = execute_layer(layer, spans, mask, 0, r1, rec1);
  const VoteVector v2 = execute_layer(layer, spans, mask, 0, r2, rec2);
  CHECK(v1.counts == v2.counts);  // same architecture, same policy, same draws
}

TEST_CASE("cd_update validates the active edge") {
  CoagentLayer layer(2, 1);
  const std::vector<double> returns = {1.0};
  CHECK_THROWS_AS(
      cd_update(layer, {}, returns, 9, EdgeAssignment::identity(), 0.1, 1.0),
      std::invalid_argument);
}

}  // TEST_SUITE
