#include "edgerec/microenv.hpp"

#include <cmath>
#include <string>

namespace edgerec {

namespace {

constexpr double kProbSumTolerance = 1e-9;

struct LeafData {
  double prob = 0.0;
  const std::vector<ExecutionRecord>* records = nullptr;
  const std::vector<double>* rewards = nullptr;
};

/// Depth-first enumeration of every joint outcome of an episode. Calls the
/// visitor once per leaf with the path probability, the executed records
/// (time-major), and the per-step rewards.
class Enumerator {
 public:
  Enumerator(const MicroEnv& env, const CoagentLayer& layer,
             const std::function<void(const LeafData&)>& visit)
      : env_(env), layer_(layer), visit_(visit) {}

  void run() {
    leaves_ = 0;
    records_.clear();
    rewards_.clear();
    step(0, env_.initial_state, 1.0);
  }

 private:
  void step(int t, int state, double prob) {
    if (t == env_.horizon) {
      if (++leaves_ > env_.enumeration_cap)
        throw EnumerationCapError(
            "micro environment outcome space exceeds the enumeration cap of " +
            std::to_string(env_.enumeration_cap) + " leaves");
      visit_(LeafData{prob, &records_, &rewards_});
      return;
    }

    const auto& state_contexts = env_.contexts.at(static_cast<std::size_t>(state));
    for (std::size_t ci = 0; ci < state_contexts.size(); ++ci) {
      const MicroContext& ctx = state_contexts[ci];
      for (const MicroMask& mask : env_.masks)
        enumerate_actions(t, state, static_cast<int>(ci), ctx, mask,
                          prob * ctx.prob * mask.prob);
    }
  }

  void enumerate_actions(int t, int state, int ctx_index, const MicroContext& ctx,
                         const MicroMask& mask, double prob) {
    std::vector<int> avail_docs;
    for (std::size_t d = 0; d < env_.n_docs; ++d)
      if (mask.available[d]) avail_docs.push_back(static_cast<int>(d));

    const std::size_t n_units = layer_.unit_count();
    const std::size_t n_cells = n_units * avail_docs.size();
    if (n_cells > 24)
      throw EnumerationCapError("too many coagent executions per step to enumerate");

    // P(action = 1) per (unit, available doc) cell, unit-major.
    std::vector<double> p1(n_cells);
    for (std::size_t u = 0; u < n_units; ++u)
      for (std::size_t k = 0; k < avail_docs.size(); ++k)
        p1[u * avail_docs.size() + k] = coagent_action_probability(
            layer_.unit(u), ctx.doc_features[static_cast<std::size_t>(avail_docs[k])]);

    VoteVector votes;
    const std::size_t base = records_.size();
    for (std::uint64_t combo = 0; combo < (std::uint64_t{1} << n_cells); ++combo) {
      records_.resize(base);
      votes.counts.assign(env_.n_docs, 0);
      votes.available = mask.available;

      double action_prob = 1.0;
      for (std::size_t u = 0; u < n_units; ++u)
        for (std::size_t k = 0; k < avail_docs.size(); ++k) {
          const std::size_t cell = u * avail_docs.size() + k;
          const int action = static_cast<int>((combo >> cell) & 1u);
          const double pi = action == 1 ? p1[cell] : 1.0 - p1[cell];
          action_prob *= pi;
          const int doc = avail_docs[k];
          votes.counts[static_cast<std::size_t>(doc)] += action;
          records_.push_back(ExecutionRecord{
              static_cast<int>(u), doc, t,
              ctx.doc_features[static_cast<std::size_t>(doc)], action, pi});
        }
      if (action_prob == 0.0) continue;  // unreachable branch, saturated unit

      // Tie-break distribution: uniform over the tied argmax slots.
      std::vector<int> tied;
      int best = -1;
      for (const int doc : avail_docs) {
        const int count = votes.counts[static_cast<std::size_t>(doc)];
        if (tied.empty() || count > best) {
          best = count;
          tied.assign(1, doc);
        } else if (count == best) {
          tied.push_back(doc);
        }
      }

      MicroStepOutcome outcome;
      outcome.state = state;
      outcome.context = ctx_index;
      outcome.votes = &votes;
      if (tied.empty()) {
        outcome.recommendation = kNoRecommendation;
        descend(t, outcome, prob * action_prob);
      } else {
        const double tie_prob = 1.0 / static_cast<double>(tied.size());
        for (const int doc : tied) {
          outcome.recommendation = doc;
          descend(t, outcome, prob * action_prob * tie_prob);
        }
      }
    }
    records_.resize(base);
  }

  void descend(int t, const MicroStepOutcome& outcome, double prob) {
    rewards_.push_back(env_.reward(outcome));
    if (t + 1 == env_.horizon) {
      step(t + 1, outcome.state, prob);
    } else {
      step(t + 1, env_.transition(outcome), prob);
    }
    rewards_.pop_back();
  }

  const MicroEnv& env_;
  const CoagentLayer& layer_;
  const std::function<void(const LeafData&)>& visit_;
  std::vector<ExecutionRecord> records_;
  std::vector<double> rewards_;
  std::uint64_t leaves_ = 0;
};

double discounted_return(const std::vector<double>& rewards, double gamma) {
  double total = 0.0;
  double weight = 1.0;
  for (const double r : rewards) {
    total += weight * r;
    weight *= gamma;
  }
  return total;
}

}  // namespace

void MicroEnv::validate(const CoagentLayer& layer) const {
  if (horizon < 1) throw std::invalid_argument("micro env: horizon must be >= 1");
  if (n_docs == 0) throw std::invalid_argument("micro env: need at least one document");
  if (!reward) throw std::invalid_argument("micro env: reward function not set");
  if (horizon > 1 && !transition)
    throw std::invalid_argument("micro env: transition required for horizon > 1");
  if (layer.feature_dim() != feature_dim)
    throw std::invalid_argument("micro env: layer feature_dim mismatch");
  if (contexts.empty()) throw std::invalid_argument("micro env: no contexts");
  for (const auto& state_contexts : contexts) {
    double sum = 0.0;
    for (const MicroContext& ctx : state_contexts) {
      sum += ctx.prob;
      if (ctx.doc_features.size() != n_docs)
        throw std::invalid_argument("micro env: context document count mismatch");
      for (const auto& f : ctx.doc_features)
        if (f.size() != feature_dim)
          throw std::invalid_argument("micro env: context feature_dim mismatch");
    }
    if (std::abs(sum - 1.0) > kProbSumTolerance)
      throw std::invalid_argument("micro env: context probabilities must sum to 1");
  }
  double mask_sum = 0.0;
  for (const MicroMask& mask : masks) {
    mask_sum += mask.prob;
    if (mask.available.size() != n_docs)
      throw std::invalid_argument("micro env: mask length mismatch");
  }
  if (std::abs(mask_sum - 1.0) > kProbSumTolerance)
    throw std::invalid_argument("micro env: mask probabilities must sum to 1");
}

double exact_objective(const MicroEnv& env, const CoagentLayer& layer, double gamma) {
  env.validate(layer);
  double objective = 0.0;
  const std::function<void(const LeafData&)> visit = [&](const LeafData& leaf) {
    objective += leaf.prob * discounted_return(*leaf.rewards, gamma);
  };
  Enumerator(env, layer, visit).run();
  return objective;
}

ParamMatrix exact_policy_gradient(const MicroEnv& env, const CoagentLayer& layer,
                                  double gamma) {
  env.validate(layer);
  ParamMatrix grad = zero_param_matrix(layer.unit_count(), layer.feature_dim());
  const std::size_t width = layer.feature_dim() + 1;
  std::vector<double> score(width);

  const std::function<void(const LeafData&)> visit = [&](const LeafData& leaf) {
    const double weight = leaf.prob * discounted_return(*leaf.rewards, gamma);
    if (weight == 0.0) return;
    for (const ExecutionRecord& rec : *leaf.records) {
      log_policy_gradient(layer.unit(static_cast<std::size_t>(rec.unit)), rec.input,
                          rec.action, score);
      std::vector<double>& row = grad[static_cast<std::size_t>(rec.unit)];
      for (std::size_t j = 0; j < width; ++j) row[j] += weight * score[j];
    }
  };
  Enumerator(env, layer, visit).run();
  return grad;
}

ParamMatrix finite_difference_gradient(const MicroEnv& env, const CoagentLayer& layer,
                                       double gamma, double h) {
  if (!(h > 0.0))
    throw std::invalid_argument("finite_difference_gradient: h must be positive");
  env.validate(layer);
  ParamMatrix grad = zero_param_matrix(layer.unit_count(), layer.feature_dim());
  CoagentLayer probe = layer;
  for (std::size_t u = 0; u < layer.unit_count(); ++u)
    for (std::size_t j = 0; j < layer.feature_dim() + 1; ++j) {
      const double original = layer.unit(u).weights[j];
      probe.unit(u).weights[j] = original + h;
      const double plus = exact_objective(env, probe, gamma);
      probe.unit(u).weights[j] = original - h;
      const double minus = exact_objective(env, probe, gamma);
      probe.unit(u).weights[j] = original;
      grad[u][j] = (plus - minus) / (2.0 * h);
    }
  return grad;
}

ParamMatrix expected_reinforce_increment(const MicroEnv& env, const CoagentLayer& layer,
                                         double gamma) {
  env.validate(layer);
  ParamMatrix expectation = zero_param_matrix(layer.unit_count(), layer.feature_dim());
  const std::function<void(const LeafData&)> visit = [&](const LeafData& leaf) {
    const std::vector<double> returns = compute_returns(*leaf.rewards, gamma);
    ParamMatrix increment = reinforce_increment(layer, *leaf.records, returns,
                                                /*alpha=*/1.0, gamma);
    scale_param_matrix(increment, leaf.prob);
    add_param_matrix(expectation, increment);
  };
  Enumerator(env, layer, visit).run();
  return expectation;
}

}  // namespace edgerec
