#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edgerec/rng.hpp"

namespace edgerec {

/// Default number of coagents per document slot.
inline constexpr std::size_t kDefaultUnitCount = 32;

/// One coagent: a binary linear-softmax unit. The logit of action 1 is
/// weights . [input; 1] (the last weight multiplies a constant bias feature);
/// the logit of action 0 is fixed at 0, so there is no temperature and no
/// redundant second weight vector.
struct CoagentParams {
  std::vector<double> weights;  // length feature_dim + 1, last entry is the bias
};

/// The shared-parameter layer: one CoagentParams per unit index, reused for
/// every document slot. Mutated only between episodes by its owning trial.
class CoagentLayer {
 public:
  CoagentLayer(std::size_t unit_count, std::size_t feature_dim);

  /// Weights i.i.d. uniform in [-scale, scale], drawn unit-major.
  static CoagentLayer init_uniform(std::size_t unit_count, std::size_t feature_dim,
                                   double scale, Rng& rng);

  std::size_t unit_count() const { return units_.size(); }
  std::size_t feature_dim() const { return feature_dim_; }
  CoagentParams& unit(std::size_t i) { return units_.at(i); }
  const CoagentParams& unit(std::size_t i) const { return units_.at(i); }

  friend bool operator==(const CoagentLayer& a, const CoagentLayer& b);

 private:
  std::size_t feature_dim_;
  std::vector<CoagentParams> units_;
};

/// P(action = 1 | input) = exp(z) / (exp(z) + 1) with z = weights . [input; 1],
/// evaluated in an overflow-free form.
double coagent_action_probability(const CoagentParams& params,
                                  std::span<const double> input);

/// d ln pi(action | input) / d weights = (action - sigma) * [input; 1],
/// written into grad_out (length feature_dim + 1).
void log_policy_gradient(const CoagentParams& params, std::span<const double> input,
                         int action, std::span<double> grad_out);

/// One coagent firing: which unit ran, for which document slot, at which
/// timestep, what it saw, what it output, and with what probability. The
/// input span must stay valid for as long as the record is used (it points
/// into the query pool in the simulators).
struct ExecutionRecord {
  int unit = 0;
  int slot = 0;
  int time = 0;
  std::span<const double> input;
  int action = 0;                    // 0 or 1
  double action_probability = 0.0;   // pi of the taken action, in (0, 1]
};

/// Per-document vote counts; slots where available is false carry no votes.
struct VoteVector {
  std::vector<int> counts;
  std::vector<bool> available;

  bool any_available() const;
};

/// Runs every unit once per AVAILABLE document slot: each unit samples a
/// binary action from its probability given that slot's features, the slot's
/// vote count is the sum of the unit actions, and one ExecutionRecord is
/// appended per (unit, available slot), unit-major. Unavailable slots produce
/// no records, no votes, and consume no rng draws.
VoteVector execute_layer(const CoagentLayer& layer,
                         std::span<const std::span<const double>> slate_features,
                         const std::vector<bool>& available, int time, Rng& rng,
                         std::vector<ExecutionRecord>& records);

/// Argmax vote count over available slots; ties are resolved uniformly at
/// random among the tied slots (one draw, consumed only on a tie). Returns
/// nothing when no slot is available.
std::optional<int> aggregate_vote(const VoteVector& votes, Rng& rng);

/// Reward-to-go per timestep: G_t = rewards[t] + gamma * G_{t+1}.
std::vector<double> compute_returns(std::span<const double> rewards, double gamma);

/// Parameter-shaped matrix: one row of feature_dim + 1 entries per unit.
using ParamMatrix = std::vector<std::vector<double>>;

ParamMatrix zero_param_matrix(std::size_t unit_count, std::size_t feature_dim);
void add_param_matrix(ParamMatrix& accum, const ParamMatrix& term);
void scale_param_matrix(ParamMatrix& m, double factor);

/// The batch REINFORCE increment: for every record, alpha * gamma^t * G_t *
/// d ln pi / d theta, evaluated against the given (pre-update) parameters and
/// summed into the shared per-unit rows. Contributions are accumulated per
/// (unit, slot) and then reduced in ascending slot order, so restricting the
/// record set to any one slot sums back to exactly the full increment.
/// returns[t] must exist for every record time.
ParamMatrix reinforce_increment(const CoagentLayer& layer,
                                std::span<const ExecutionRecord> records,
                                std::span<const double> returns, double alpha,
                                double gamma);

CoagentLayer apply_increment(const CoagentLayer& layer, const ParamMatrix& increment);

/// layer + reinforce_increment(layer, ...), applied once.
CoagentLayer reinforce_update(const CoagentLayer& layer,
                              std::span<const ExecutionRecord> records,
                              std::span<const double> returns, double alpha,
                              double gamma);

/// Parameter snapshot: flat numeric array with a (unit count, feature_dim,
/// version) header; round-trips bit-exactly.
void save_layer(const CoagentLayer& layer, const std::string& path);
CoagentLayer load_layer(const std::string& path);

}  // namespace edgerec
