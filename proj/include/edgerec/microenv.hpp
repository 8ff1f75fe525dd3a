#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "edgerec/coagent.hpp"

namespace edgerec {

/// Thrown when a micro environment's joint outcome space exceeds the
/// configured enumeration cap.
class EnumerationCapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One possible context for a step: per-document feature vectors plus the
/// probability of drawing it.
struct MicroContext {
  double prob = 0.0;
  std::vector<std::vector<double>> doc_features;  // [doc][feature_dim]
};

/// One possible availability outcome.
struct MicroMask {
  double prob = 0.0;
  std::vector<bool> available;  // length n_docs
};

/// What happened in one enumerated step; handed to the reward and transition
/// functions. recommendation == kNoRecommendation when no document was
/// available.
struct MicroStepOutcome {
  int state = 0;
  int context = 0;                 // index into contexts[state]
  const VoteVector* votes = nullptr;
  int recommendation = -1;
};

inline constexpr int kNoRecommendation = -1;

/// A finitely enumerable environment for exact-gradient verification: a small
/// document slate, a finite context distribution per environment state, a
/// finite availability distribution, a deterministic transition, and a reward
/// that may inspect the votes. Intended for micro instances only (a few
/// documents, units, contexts, and steps).
struct MicroEnv {
  std::size_t n_docs = 1;
  std::size_t feature_dim = 1;
  int horizon = 1;  // timesteps per episode (1 = bandit)
  int initial_state = 0;
  std::vector<std::vector<MicroContext>> contexts;  // [state][outcome]
  std::vector<MicroMask> masks;
  std::function<double(const MicroStepOutcome&)> reward;
  std::function<int(const MicroStepOutcome&)> transition;  // unused when horizon == 1
  std::uint64_t enumeration_cap = 4'000'000;

  /// Checks distributions sum to 1, shapes line up, and hooks are set.
  void validate(const CoagentLayer& layer) const;
};

/// J(theta): the exactly enumerated expected discounted return.
double exact_objective(const MicroEnv& env, const CoagentLayer& layer, double gamma);

/// grad J, computed exactly as the sum over all joint outcomes of
/// probability * discounted return * joint score function.
ParamMatrix exact_policy_gradient(const MicroEnv& env, const CoagentLayer& layer,
                                  double gamma);

/// Central finite differences of the exactly enumerated objective.
ParamMatrix finite_difference_gradient(const MicroEnv& env, const CoagentLayer& layer,
                                       double gamma, double h);

/// The exact expectation of the per-episode REINFORCE increment (alpha = 1),
/// enumerated over every context, mask, action combination, and tie-break,
/// with each leaf's increment produced by reinforce_increment itself. By the
/// coagent policy-gradient property this equals exact_policy_gradient.
ParamMatrix expected_reinforce_increment(const MicroEnv& env, const CoagentLayer& layer,
                                         double gamma);

}  // namespace edgerec
