#include "edgerec/synthetic.hpp"

#include <fstream>
#include <stdexcept>
#include <vector>

namespace edgerec {

std::string generate_synthetic_letor(const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.query_count == 0 || spec.feature_dim == 0)
    throw std::invalid_argument("synthetic spec: query_count and feature_dim must be positive");

  const int max_label = max_relevance(spec.kind);
  Rng rng(seed);
  std::string out;
  out.reserve(spec.query_count * 6 * spec.feature_dim * 24);

  for (std::size_t q = 0; q < spec.query_count; ++q) {
    std::vector<std::size_t> bucket_sizes(static_cast<std::size_t>(max_label) + 1);
    std::size_t total = 0;
    for (std::size_t& n : bucket_sizes) {
      n = 1 + rng.uniform_below(3);
      total += n;
    }
    if (rng.bernoulli(spec.bucket_drop_prob)) {
      const std::size_t victim = rng.uniform_below(bucket_sizes.size());
      total -= bucket_sizes[victim];
      bucket_sizes[victim] = 0;
    }
    // Keep every query slate-worthy.
    while (total < kSlateSize) {
      const std::size_t bucket = rng.uniform_below(bucket_sizes.size());
      if (bucket_sizes[bucket] == 0) continue;
      ++bucket_sizes[bucket];
      ++total;
    }

    DocumentRecord record;
    record.query_id = std::to_string(q + 1);
    record.features.resize(spec.feature_dim);
    for (int label = 0; label <= max_label; ++label) {
      const double level = (static_cast<double>(label) / max_label - 0.5) * 1.6;
      for (std::size_t d = 0; d < bucket_sizes[static_cast<std::size_t>(label)]; ++d) {
        record.relevance = label;
        for (std::size_t j = 0; j < spec.feature_dim; ++j) {
          const double direction = j % 2 == 0 ? 1.0 : -1.0;
          record.features[j] = direction * level + rng.uniform(-spec.noise, spec.noise);
        }
        out += serialize_letor_line(record);
        out += '\n';
      }
    }
  }
  return out;
}

void write_synthetic_letor(const SyntheticSpec& spec, std::uint64_t seed,
                           const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << generate_synthetic_letor(spec, seed);
  if (!os) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace edgerec
