#include "edgerec/coagent.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "edgerec/binio.hpp"

namespace edgerec {

namespace {

constexpr char kLayerMagic[4] = {'E', 'R', 'C', 'L'};
constexpr std::uint32_t kLayerVersion = 1;

double logit(const CoagentParams& params, std::span<const double> input) {
  if (input.size() + 1 != params.weights.size())
    throw std::invalid_argument("coagent input has dimension " +
                                std::to_string(input.size()) + ", unit expects " +
                                std::to_string(params.weights.size() - 1));
  double z = params.weights.back();
  for (std::size_t j = 0; j < input.size(); ++j) z += params.weights[j] * input[j];
  return z;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

CoagentLayer::CoagentLayer(std::size_t unit_count, std::size_t feature_dim)
    : feature_dim_(feature_dim) {
  units_.resize(unit_count);
  for (CoagentParams& u : units_) u.weights.assign(feature_dim + 1, 0.0);
}

CoagentLayer CoagentLayer::init_uniform(std::size_t unit_count, std::size_t feature_dim,
                                        double scale, Rng& rng) {
  CoagentLayer layer(unit_count, feature_dim);
  for (CoagentParams& u : layer.units_)
    for (double& w : u.weights) w = rng.uniform(-scale, scale);
  return layer;
}

bool operator==(const CoagentLayer& a, const CoagentLayer& b) {
  if (a.feature_dim_ != b.feature_dim_ || a.units_.size() != b.units_.size())
    return false;
  for (std::size_t i = 0; i < a.units_.size(); ++i)
    if (a.units_[i].weights != b.units_[i].weights) return false;
  return true;
}

double coagent_action_probability(const CoagentParams& params,
                                  std::span<const double> input) {
  return sigmoid(logit(params, input));
}

void log_policy_gradient(const CoagentParams& params, std::span<const double> input,
                         int action, std::span<double> grad_out) {
  if (grad_out.size() != params.weights.size())
    throw std::invalid_argument("log_policy_gradient: bad output size");
  const double sigma = coagent_action_probability(params, input);
  const double coef = static_cast<double>(action) - sigma;
  for (std::size_t j = 0; j < input.size(); ++j) grad_out[j] = coef * input[j];
  grad_out[input.size()] = coef;
}

bool VoteVector::any_available() const {
  return std::find(available.begin(), available.end(), true) != available.end();
}

VoteVector execute_layer(const CoagentLayer& layer,
                         std::span<const std::span<const double>> slate_features,
                         const std::vector<bool>& available, int time, Rng& rng,
                         std::vector<ExecutionRecord>& records) {
  if (available.size() != slate_features.size())
    throw std::invalid_argument("execute_layer: mask length " +
                                std::to_string(available.size()) +
                                " does not match slate size " +
                                std::to_string(slate_features.size()));
  VoteVector votes;
  votes.counts.assign(slate_features.size(), 0);
  votes.available = available;

  for (std::size_t u = 0; u < layer.unit_count(); ++u) {
    const CoagentParams& unit = layer.unit(u);
    for (std::size_t s = 0; s < slate_features.size(); ++s) {
      if (!available[s]) continue;
      const double sigma = coagent_action_probability(unit, slate_features[s]);
      const int action = rng.bernoulli(sigma) ? 1 : 0;
      votes.counts[s] += action;
      records.push_back(ExecutionRecord{static_cast<int>(u), static_cast<int>(s),
                                        time, slate_features[s], action,
                                        action == 1 ? sigma : 1.0 - sigma});
    }
  }
  return votes;
}

std::optional<int> aggregate_vote(const VoteVector& votes, Rng& rng) {
  int best = -1;
  std::vector<int> tied;
  for (std::size_t s = 0; s < votes.counts.size(); ++s) {
    if (!votes.available[s]) continue;
    if (tied.empty() || votes.counts[s] > best) {
      best = votes.counts[s];
      tied.assign(1, static_cast<int>(s));
    } else if (votes.counts[s] == best) {
      tied.push_back(static_cast<int>(s));
    }
  }
  if (tied.empty()) return std::nullopt;
  if (tied.size() == 1) return tied.front();
  return tied[rng.uniform_below(tied.size())];
}

std::vector<double> compute_returns(std::span<const double> rewards, double gamma) {
  std::vector<double> returns(rewards.size(), 0.0);
  double next = 0.0;
  for (std::size_t k = rewards.size(); k-- > 0;) {
    next = rewards[k] + gamma * next;
    returns[k] = next;
  }
  return returns;
}

ParamMatrix zero_param_matrix(std::size_t unit_count, std::size_t feature_dim) {
  return ParamMatrix(unit_count, std::vector<double>(feature_dim + 1, 0.0));
}

void add_param_matrix(ParamMatrix& accum, const ParamMatrix& term) {
  if (accum.size() != term.size())
    throw std::invalid_argument("add_param_matrix: unit count mismatch");
  for (std::size_t u = 0; u < accum.size(); ++u) {
    if (accum[u].size() != term[u].size())
      throw std::invalid_argument("add_param_matrix: row size mismatch");
    for (std::size_t j = 0; j < accum[u].size(); ++j) accum[u][j] += term[u][j];
  }
}

void scale_param_matrix(ParamMatrix& m, double factor) {
  for (auto& row : m)
    for (double& v : row) v *= factor;
}

ParamMatrix reinforce_increment(const CoagentLayer& layer,
                                std::span<const ExecutionRecord> records,
                                std::span<const double> returns, double alpha,
                                double gamma) {
  if (!(alpha > 0.0))
    throw std::invalid_argument("reinforce_increment: alpha must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw std::invalid_argument("reinforce_increment: gamma must lie in [0, 1]");

  const std::size_t width = layer.feature_dim() + 1;
  std::size_t n_slots = 0;
  for (const ExecutionRecord& rec : records)
    n_slots = std::max(n_slots, static_cast<std::size_t>(rec.slot) + 1);

  // partials[unit][slot] keeps each slot's contribution separate until the
  // final slot-ordered reduction; see the header contract.
  std::vector<std::vector<std::vector<double>>> partials(
      layer.unit_count(),
      std::vector<std::vector<double>>(n_slots, std::vector<double>(width, 0.0)));

  for (const ExecutionRecord& rec : records) {
    if (rec.time < 0 || static_cast<std::size_t>(rec.time) >= returns.size())
      throw std::runtime_error("reinforce_increment: no return recorded for time " +
                               std::to_string(rec.time));
    if (rec.input.size() + 1 != width)
      throw std::invalid_argument("reinforce_increment: record input dimension " +
                                  std::to_string(rec.input.size()) +
                                  " does not match the layer");
    const double sigma =
        coagent_action_probability(layer.unit(static_cast<std::size_t>(rec.unit)),
                                   rec.input);
    const double coef = alpha * std::pow(gamma, rec.time) * returns[rec.time] *
                        (static_cast<double>(rec.action) - sigma);
    std::vector<double>& row =
        partials[static_cast<std::size_t>(rec.unit)][static_cast<std::size_t>(rec.slot)];
    for (std::size_t j = 0; j + 1 < width; ++j) row[j] += coef * rec.input[j];
    row[width - 1] += coef;
  }

  ParamMatrix increment = zero_param_matrix(layer.unit_count(), layer.feature_dim());
  for (std::size_t u = 0; u < layer.unit_count(); ++u)
    for (std::size_t s = 0; s < n_slots; ++s)
      for (std::size_t j = 0; j < width; ++j) increment[u][j] += partials[u][s][j];
  return increment;
}

CoagentLayer apply_increment(const CoagentLayer& layer, const ParamMatrix& increment) {
  if (increment.size() != layer.unit_count())
    throw std::invalid_argument("apply_increment: unit count mismatch");
  CoagentLayer updated = layer;
  for (std::size_t u = 0; u < updated.unit_count(); ++u) {
    std::vector<double>& w = updated.unit(u).weights;
    if (increment[u].size() != w.size())
      throw std::invalid_argument("apply_increment: row size mismatch");
    for (std::size_t j = 0; j < w.size(); ++j) w[j] += increment[u][j];
  }
  return updated;
}

CoagentLayer reinforce_update(const CoagentLayer& layer,
                              std::span<const ExecutionRecord> records,
                              std::span<const double> returns, double alpha,
                              double gamma) {
  return apply_increment(layer, reinforce_increment(layer, records, returns, alpha, gamma));
}

void save_layer(const CoagentLayer& layer, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open snapshot '" + path + "' for writing");
  os.write(kLayerMagic, 4);
  binio::write_u32(os, kLayerVersion);
  binio::write_u64(os, layer.unit_count());
  binio::write_u64(os, layer.feature_dim());
  for (std::size_t u = 0; u < layer.unit_count(); ++u)
    for (const double w : layer.unit(u).weights) binio::write_f64(os, w);
  if (!os) throw std::runtime_error("failed writing snapshot '" + path + "'");
}

CoagentLayer load_layer(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open snapshot '" + path + "'");
  char magic[4];
  if (!is.read(magic, 4) || std::string_view(magic, 4) != std::string_view(kLayerMagic, 4))
    throw std::runtime_error("snapshot '" + path + "': bad magic");
  const std::uint32_t version = binio::read_u32(is);
  if (version != kLayerVersion)
    throw std::runtime_error("snapshot '" + path + "': unsupported version " +
                             std::to_string(version));
  const std::uint64_t units = binio::read_u64(is);
  const std::uint64_t dim = binio::read_u64(is);
  CoagentLayer layer(units, dim);
  for (std::size_t u = 0; u < layer.unit_count(); ++u)
    for (double& w : layer.unit(u).weights) w = binio::read_f64(is);
  return layer;
}

}  // namespace edgerec
