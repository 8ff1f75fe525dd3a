#include "edgerec/sim.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace edgerec {

SimVariant SimVariant::make(DatasetKind dataset, SimMode mode) {
  SimVariant v;
  v.dataset = dataset;
  v.mode = mode;
  if (dataset == DatasetKind::Mslr) {
    v.use_triggers = {0, 1};
    v.use_multiplier = 10.0;
  } else {
    v.use_triggers = {0};
    v.use_multiplier = 5.0;
  }
  v.episode_length = mode == SimMode::Rl ? 5 : 1;
  return v;
}

AvailabilityMask sample_availability(double unreliability, Rng& rng) {
  if (!(unreliability >= 0.0 && unreliability <= 1.0))
    throw std::invalid_argument("sample_availability: unreliability must lie in [0, 1]");
  AvailabilityMask mask;
  mask.available.resize(kSlateSize);
  for (std::size_t s = 0; s < kSlateSize; ++s)
    mask.available[s] = rng.uniform01() >= unreliability;
  return mask;
}

UserState use_transition(const UserState& state,
                         std::optional<int> recommended_relevance,
                         const SimVariant& variant, Rng& rng) {
  if (!recommended_relevance.has_value()) return state;
  const bool triggered =
      std::find(variant.use_triggers.begin(), variant.use_triggers.end(),
                *recommended_relevance) != variant.use_triggers.end();
  if (!triggered) return state;
  static constexpr std::array<double, 3> kIncrements = {0.0, 0.4, 0.8};
  UserState next = state;
  next.use += kIncrements[rng.uniform_below(kIncrements.size())];
  return next;
}

double compute_reward(std::optional<int> recommended_relevance,
                      const UserState& state, const SimVariant& variant) {
  if (!recommended_relevance.has_value()) return 0.0;
  const double relevance = static_cast<double>(*recommended_relevance);
  if (variant.mode == SimMode::Rl && state.use >= variant.use_threshold)
    return relevance * variant.use_multiplier;
  return relevance;
}

double EpisodeTrace::undiscounted_return() const {
  double total = 0.0;
  for (const EpisodeStep& step : steps) total += step.reward;
  return total;
}

EpisodeTrace run_episode(const QueryPool& pool, const CoagentLayer& layer,
                         const SimVariant& variant, double unreliability,
                         Rng& rng, double gamma) {
  EpisodeTrace trace;
  trace.steps.reserve(static_cast<std::size_t>(variant.episode_length));
  trace.records.reserve(static_cast<std::size_t>(variant.episode_length) *
                        layer.unit_count() * kSlateSize);

  UserState state;
  std::size_t query_index = 0;
  std::vector<double> rewards;
  rewards.reserve(static_cast<std::size_t>(variant.episode_length));

  for (int t = 0; t < variant.episode_length; ++t) {
    if (t == 0 || variant.resample_query_each_step)
      query_index = sample_query(pool, rng);

    EpisodeStep step;
    step.slate = select_candidates(pool, query_index, rng);
    step.mask = sample_availability(unreliability, rng);

    const PooledQuery& query = pool.query(query_index);
    std::array<std::span<const double>, kSlateSize> features;
    for (std::size_t s = 0; s < kSlateSize; ++s)
      features[s] = query.docs[static_cast<std::size_t>(step.slate.doc_indices[s])].features;

    step.record_begin = trace.records.size();
    step.votes = execute_layer(layer, features, step.mask.available, t, rng,
                               trace.records);
    step.record_end = trace.records.size();
    step.recommendation = aggregate_vote(step.votes, rng);

    const std::optional<int> relevance =
        step.recommendation.has_value()
            ? std::optional<int>(step.slate.relevances[static_cast<std::size_t>(
                  *step.recommendation)])
            : std::nullopt;

    step.use_before = state.use;
    step.reward = compute_reward(relevance, state, variant);
    if (variant.mode == SimMode::Rl)
      state = use_transition(state, relevance, variant, rng);

    rewards.push_back(step.reward);
    trace.steps.push_back(std::move(step));
  }

  trace.returns = compute_returns(rewards, gamma);
  return trace;
}

double optimal_available_reward(const CandidateSlate& slate,
                                const AvailabilityMask& mask,
                                const SimVariant& variant, const UserState& state) {
  double best = 0.0;
  for (std::size_t s = 0; s < kSlateSize; ++s) {
    if (!mask.available[s]) continue;
    best = std::max(best, compute_reward(slate.relevances[s], state, variant));
  }
  return best;
}

}  // namespace edgerec
