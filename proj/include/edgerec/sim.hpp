#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "edgerec/coagent.hpp"
#include "edgerec/letor.hpp"
#include "edgerec/rng.hpp"

namespace edgerec {

/// Which document slots' edge computations arrived before the deadline.
struct AvailabilityMask {
  std::vector<bool> available;  // length kSlateSize
};

/// Latent user state of the RL simulators. Starts each episode at 0 and only
/// ever grows, by increments drawn from {0.0, 0.4, 0.8}.
struct UserState {
  double use = 0.0;
};

enum class SimMode { Bandit, Rl };

/// Parameters of one simulator variant. The four canonical configurations
/// come from make(); the fields stay adjustable for ablations.
struct SimVariant {
  DatasetKind dataset = DatasetKind::Mq2008;
  SimMode mode = SimMode::Bandit;
  std::vector<int> use_triggers;       // relevances that may raise the USE
  double use_multiplier = 1.0;         // reward multiplier once USE >= threshold
  double use_threshold = 0.8;
  int episode_length = 1;              // 1 for bandit, 5 for RL
  bool resample_query_each_step = true;

  static SimVariant make(DatasetKind dataset, SimMode mode);
};

/// Each of the five slots is independently available with probability 1 - p.
/// Consumes exactly five draws.
AvailabilityMask sample_availability(double unreliability, Rng& rng);

/// If the recommended relevance is one of the variant's triggers, the USE
/// increases by an increment drawn uniformly from {0.0, 0.4, 0.8} (one draw);
/// otherwise, and on NoRecommendation, the state is unchanged and no draw is
/// consumed. RL variants only.
UserState use_transition(const UserState& state,
                         std::optional<int> recommended_relevance,
                         const SimVariant& variant, Rng& rng);

/// NoRecommendation earns 0. Bandit mode pays the relevance directly; RL mode
/// multiplies it by the variant multiplier when the USE at the time of the
/// recommendation has reached the threshold.
double compute_reward(std::optional<int> recommended_relevance,
                      const UserState& state, const SimVariant& variant);

struct EpisodeStep {
  CandidateSlate slate;
  AvailabilityMask mask;
  VoteVector votes;
  std::optional<int> recommendation;  // document slot
  double use_before = 0.0;            // USE when the recommendation was made
  double reward = 0.0;
  std::size_t record_begin = 0;       // range into EpisodeTrace::records
  std::size_t record_end = 0;
};

struct EpisodeTrace {
  std::vector<EpisodeStep> steps;
  std::vector<ExecutionRecord> records;  // time-major, unit-major within a step
  std::vector<double> returns;           // reward-to-go per timestep

  double undiscounted_return() const;
};

/// Runs one episode. Draw order per timestep: query (unless the variant fixes
/// it after step 0), slate picks, availability mask, coagent actions
/// (unit-major), tie-break (only on a tie), USE increment (RL, only on a
/// trigger). The reward uses the USE from before the step's transition; record
/// input spans point into the pool and stay valid while it lives.
EpisodeTrace run_episode(const QueryPool& pool, const CoagentLayer& layer,
                         const SimVariant& variant, double unreliability,
                         Rng& rng, double gamma = 1.0);

/// Myopic ceiling: the best reward any policy could earn from the available
/// documents of this slate (0 if none is available).
double optimal_available_reward(const CandidateSlate& slate,
                                const AvailabilityMask& mask,
                                const SimVariant& variant, const UserState& state);

}  // namespace edgerec
