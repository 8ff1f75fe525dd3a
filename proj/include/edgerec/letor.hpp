#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "edgerec/rng.hpp"

namespace edgerec {

/// Number of candidate documents presented per timestep.
inline constexpr std::size_t kSlateSize = 5;

enum class DatasetKind { Mslr, Mq2008 };

/// Largest relevance label of the dataset (MSLR: 4, MQ2008: 2).
int max_relevance(DatasetKind kind);

/// Relevance-bucket priority used when assembling a slate
/// (MSLR: 4,0,2,3,1; MQ2008: 0,2,1).
const std::vector<int>& priority_list(DatasetKind kind);

std::string_view dataset_name(DatasetKind kind);
DatasetKind dataset_from_name(std::string_view name);

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t column);
  /// 1-based character offset of the offending token.
  std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

/// One query/document pair as read from a LETOR file. Features are raw
/// (pre-normalization), dense, placed by their 1-based file index.
struct DocumentRecord {
  int relevance = 0;
  std::string query_id;
  std::vector<double> features;
};

/// Parses "<label> qid:<id> <index>:<value> ... [# comment]".
/// Indices absent from the line default to 0.0.
DocumentRecord parse_letor_line(std::string_view line);

/// Inverse of parse_letor_line; writes every dense feature explicitly.
std::string serialize_letor_line(const DocumentRecord& record);

std::vector<DocumentRecord> load_letor_file(const std::string& path);
std::vector<DocumentRecord> load_letor_files(const std::vector<std::string>& paths);

struct PooledDocument {
  int relevance = 0;
  std::vector<double> features;  // normalized to [-1, 1]
};

struct PooledQuery {
  std::string id;
  std::vector<PooledDocument> docs;
  /// buckets[r] lists indices into docs with relevance r.
  std::vector<std::vector<int>> buckets;
};

/// Normalized sampling substrate for the simulators. Immutable after build;
/// safe for concurrent reads from parallel trials.
class QueryPool {
 public:
  /// Per-dimension min/max are taken over every input record; each feature is
  /// then mapped affinely so the dataset min lands on -1 and the max on +1
  /// (constant dimensions map to 0). Queries with fewer than min_docs
  /// documents are dropped. Query order is first appearance in the input.
  static QueryPool build(const std::vector<DocumentRecord>& records,
                         DatasetKind kind, std::size_t min_docs = kSlateSize);

  DatasetKind kind() const { return kind_; }
  std::size_t feature_dim() const { return feature_dim_; }
  std::size_t query_count() const { return queries_.size(); }
  const PooledQuery& query(std::size_t index) const { return queries_.at(index); }
  const std::vector<std::pair<double, double>>& feature_bounds() const {
    return bounds_;
  }

  friend bool operator==(const QueryPool& a, const QueryPool& b);
  friend QueryPool load_pool(const std::string& path);

 private:
  QueryPool() = default;

  DatasetKind kind_ = DatasetKind::Mslr;
  std::size_t feature_dim_ = 0;
  std::vector<std::pair<double, double>> bounds_;
  std::vector<PooledQuery> queries_;
};

/// Exactly five documents of one query, in selection order.
struct CandidateSlate {
  std::size_t query_index = 0;
  std::array<int, kSlateSize> doc_indices{};
  std::array<int, kSlateSize> relevances{};
};

/// Uniform draw over the pool's queries; returns the query index.
std::size_t sample_query(const QueryPool& pool, Rng& rng);

/// Walks the dataset's priority list, taking one uniformly-random unchosen
/// document per bucket; a missing or exhausted bucket is substituted by the
/// first bucket from the head of the list that still has an unchosen
/// document. Consumes one rng draw per pick.
CandidateSlate select_candidates(const QueryPool& pool, std::size_t query_index,
                                 Rng& rng);

/// Versioned binary cache of a normalized pool; round-trips bit-exactly.
void save_pool(const QueryPool& pool, const std::string& path);
QueryPool load_pool(const std::string& path);

}  // namespace edgerec
