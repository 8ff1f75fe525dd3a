#pragma once

#include <cstdint>
#include <string>

#include "edgerec/letor.hpp"

namespace edgerec {

/// Shape of a generated LETOR-format dataset: queries carry 1..3 documents
/// per relevance bucket, an occasional query drops one bucket (exercising the
/// slate substitution rule), and features correlate linearly with relevance
/// plus uniform noise, so a linear policy can separate the labels.
struct SyntheticSpec {
  DatasetKind kind = DatasetKind::Mq2008;
  std::size_t query_count = 150;
  std::size_t feature_dim = 8;
  double noise = 0.3;
  double bucket_drop_prob = 0.15;
};

std::string generate_synthetic_letor(const SyntheticSpec& spec, std::uint64_t seed);

void write_synthetic_letor(const SyntheticSpec& spec, std::uint64_t seed,
                           const std::string& path);

}  // namespace edgerec
