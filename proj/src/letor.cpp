#include "edgerec/letor.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "edgerec/binio.hpp"

namespace edgerec {

namespace {

constexpr char kPoolMagic[4] = {'E', 'R', 'Q', 'P'};
constexpr std::uint32_t kPoolVersion = 1;

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

std::vector<Token> tokenize(std::string_view body) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < body.size()) {
    while (i < body.size() && (body[i] == ' ' || body[i] == '\t' || body[i] == '\r')) ++i;
    if (i >= body.size()) break;
    const std::size_t start = i;
    while (i < body.size() && body[i] != ' ' && body[i] != '\t' && body[i] != '\r') ++i;
    tokens.push_back({body.substr(start, i - start), start + 1});
  }
  return tokens;
}

int parse_int_strict(std::string_view text, const Token& tok, const char* what) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw ParseError(std::string("malformed ") + what + " '" + std::string(tok.text) + "'",
                     tok.column);
  return value;
}

double parse_double_strict(std::string_view text, const Token& tok) {
  double value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value))
    throw ParseError("malformed feature value '" + std::string(tok.text) + "'", tok.column);
  return value;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

int max_relevance(DatasetKind kind) {
  return kind == DatasetKind::Mslr ? 4 : 2;
}

const std::vector<int>& priority_list(DatasetKind kind) {
  static const std::vector<int> mslr = {4, 0, 2, 3, 1};
  static const std::vector<int> mq2008 = {0, 2, 1};
  return kind == DatasetKind::Mslr ? mslr : mq2008;
}

std::string_view dataset_name(DatasetKind kind) {
  return kind == DatasetKind::Mslr ? "mslr" : "mq2008";
}

DatasetKind dataset_from_name(std::string_view name) {
  if (name == "mslr") return DatasetKind::Mslr;
  if (name == "mq2008") return DatasetKind::Mq2008;
  throw std::invalid_argument("unknown dataset '" + std::string(name) +
                              "' (expected mslr or mq2008)");
}

ParseError::ParseError(const std::string& message, std::size_t column)
    : std::runtime_error("column " + std::to_string(column) + ": " + message),
      column_(column) {}

DocumentRecord parse_letor_line(std::string_view line) {
  const std::size_t hash = line.find('#');
  const std::string_view body = hash == std::string_view::npos ? line : line.substr(0, hash);

  const std::vector<Token> tokens = tokenize(body);
  if (tokens.empty()) throw ParseError("empty line", 1);
  if (tokens.size() < 2) throw ParseError("missing qid token", tokens[0].column);

  DocumentRecord record;
  record.relevance = parse_int_strict(tokens[0].text, tokens[0], "relevance label");

  if (!tokens[1].text.starts_with("qid:") || tokens[1].text.size() == 4)
    throw ParseError("expected qid:<id>, got '" + std::string(tokens[1].text) + "'",
                     tokens[1].column);
  record.query_id = std::string(tokens[1].text.substr(4));

  std::vector<char> seen;
  for (std::size_t k = 2; k < tokens.size(); ++k) {
    const Token& tok = tokens[k];
    const std::size_t colon = tok.text.find(':');
    if (colon == std::string_view::npos || colon == 0 || colon + 1 == tok.text.size())
      throw ParseError("malformed feature pair '" + std::string(tok.text) + "'", tok.column);
    const int index = parse_int_strict(tok.text.substr(0, colon), tok, "feature index");
    if (index < 1)
      throw ParseError("feature index must be >= 1, got " + std::to_string(index), tok.column);
    const double value = parse_double_strict(tok.text.substr(colon + 1), tok);

    const std::size_t slot = static_cast<std::size_t>(index - 1);
    if (slot >= record.features.size()) {
      record.features.resize(slot + 1, 0.0);
      seen.resize(slot + 1, 0);
    }
    if (seen[slot])
      throw ParseError("duplicate feature index " + std::to_string(index), tok.column);
    seen[slot] = 1;
    record.features[slot] = value;
  }
  return record;
}

std::string serialize_letor_line(const DocumentRecord& record) {
  std::string out = std::to_string(record.relevance) + " qid:" + record.query_id;
  for (std::size_t i = 0; i < record.features.size(); ++i) {
    out += ' ';
    out += std::to_string(i + 1);
    out += ':';
    out += format_double(record.features[i]);
  }
  return out;
}

std::vector<DocumentRecord> load_letor_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file '" + path + "'");
  std::vector<DocumentRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // Skip blank lines; everything else must parse.
    bool blank = true;
    for (const char c : line)
      if (c != ' ' && c != '\t' && c != '\r') { blank = false; break; }
    if (blank) continue;
    try {
      records.push_back(parse_letor_line(line));
    } catch (const ParseError& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what(), e.column());
    }
  }
  return records;
}

std::vector<DocumentRecord> load_letor_files(const std::vector<std::string>& paths) {
  std::vector<DocumentRecord> all;
  for (const std::string& path : paths) {
    std::vector<DocumentRecord> part = load_letor_file(path);
    all.insert(all.end(), std::make_move_iterator(part.begin()),
               std::make_move_iterator(part.end()));
  }
  return all;
}

namespace {

std::vector<std::vector<int>> build_buckets(const PooledQuery& query, int max_label) {
  std::vector<std::vector<int>> buckets(static_cast<std::size_t>(max_label) + 1);
  for (std::size_t i = 0; i < query.docs.size(); ++i)
    buckets[static_cast<std::size_t>(query.docs[i].relevance)].push_back(static_cast<int>(i));
  return buckets;
}

}  // namespace

QueryPool QueryPool::build(const std::vector<DocumentRecord>& records,
                           DatasetKind kind, std::size_t min_docs) {
  if (records.empty())
    throw std::invalid_argument("build_query_pool: no records");

  const std::size_t dim = records[0].features.size();
  const int max_label = max_relevance(kind);
  for (const DocumentRecord& r : records) {
    if (r.features.size() != dim)
      throw std::invalid_argument(
          "build_query_pool: inconsistent feature dimensionality (" +
          std::to_string(r.features.size()) + " vs " + std::to_string(dim) + ")");
    if (r.relevance < 0 || r.relevance > max_label)
      throw std::invalid_argument("build_query_pool: relevance " +
                                  std::to_string(r.relevance) +
                                  " outside the dataset label domain");
  }

  QueryPool pool;
  pool.kind_ = kind;
  pool.feature_dim_ = dim;
  pool.bounds_.assign(dim, {std::numeric_limits<double>::infinity(),
                            -std::numeric_limits<double>::infinity()});
  for (const DocumentRecord& r : records)
    for (std::size_t j = 0; j < dim; ++j) {
      pool.bounds_[j].first = std::min(pool.bounds_[j].first, r.features[j]);
      pool.bounds_[j].second = std::max(pool.bounds_[j].second, r.features[j]);
    }

  // Group by query id, keeping first-appearance order.
  std::unordered_map<std::string, std::size_t> index_of;
  std::vector<PooledQuery> queries;
  for (const DocumentRecord& r : records) {
    auto [it, inserted] = index_of.try_emplace(r.query_id, queries.size());
    if (inserted) queries.push_back(PooledQuery{r.query_id, {}, {}});
    PooledDocument doc;
    doc.relevance = r.relevance;
    doc.features.resize(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      const auto [lo, hi] = pool.bounds_[j];
      doc.features[j] = lo == hi ? 0.0 : -1.0 + 2.0 * (r.features[j] - lo) / (hi - lo);
    }
    queries[it->second].docs.push_back(std::move(doc));
  }

  for (PooledQuery& q : queries) {
    if (q.docs.size() < min_docs) continue;
    q.buckets = build_buckets(q, max_label);
    pool.queries_.push_back(std::move(q));
  }
  return pool;
}

bool operator==(const QueryPool& a, const QueryPool& b) {
  if (a.kind_ != b.kind_ || a.feature_dim_ != b.feature_dim_ ||
      a.bounds_ != b.bounds_ || a.queries_.size() != b.queries_.size())
    return false;
  for (std::size_t i = 0; i < a.queries_.size(); ++i) {
    const PooledQuery& qa = a.queries_[i];
    const PooledQuery& qb = b.queries_[i];
    if (qa.id != qb.id || qa.docs.size() != qb.docs.size()) return false;
    for (std::size_t d = 0; d < qa.docs.size(); ++d)
      if (qa.docs[d].relevance != qb.docs[d].relevance ||
          qa.docs[d].features != qb.docs[d].features)
        return false;
  }
  return true;
}

std::size_t sample_query(const QueryPool& pool, Rng& rng) {
  if (pool.query_count() == 0)
    throw std::runtime_error("sample_query: empty query pool");
  return rng.uniform_below(pool.query_count());
}

CandidateSlate select_candidates(const QueryPool& pool, std::size_t query_index,
                                 Rng& rng) {
  const PooledQuery& query = pool.query(query_index);
  if (query.docs.size() < kSlateSize)
    throw std::runtime_error("select_candidates: query '" + query.id +
                             "' has fewer than " + std::to_string(kSlateSize) +
                             " documents");

  const std::vector<int>& priority = priority_list(pool.kind());
  std::vector<std::vector<int>> remaining = query.buckets;

  CandidateSlate slate;
  slate.query_index = query_index;
  for (std::size_t round = 0; round < kSlateSize; ++round) {
    int bucket = priority[round % priority.size()];
    if (remaining[static_cast<std::size_t>(bucket)].empty()) {
      bucket = -1;
      for (const int candidate : priority)
        if (!remaining[static_cast<std::size_t>(candidate)].empty()) {
          bucket = candidate;
          break;
        }
      if (bucket < 0)
        throw std::runtime_error("select_candidates: query '" + query.id +
                                 "' exhausted before filling the slate");
    }
    std::vector<int>& docs = remaining[static_cast<std::size_t>(bucket)];
    const std::size_t pick = rng.uniform_below(docs.size());
    slate.doc_indices[round] = docs[pick];
    slate.relevances[round] = bucket;
    docs[pick] = docs.back();
    docs.pop_back();
  }
  return slate;
}

void save_pool(const QueryPool& pool, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open pool cache '" + path + "' for writing");
  os.write(kPoolMagic, 4);
  binio::write_u32(os, kPoolVersion);
  binio::write_u32(os, pool.kind() == DatasetKind::Mslr ? 0u : 1u);
  binio::write_u64(os, pool.feature_dim());
  for (const auto& [lo, hi] : pool.feature_bounds()) {
    binio::write_f64(os, lo);
    binio::write_f64(os, hi);
  }
  binio::write_u64(os, pool.query_count());
  for (std::size_t qi = 0; qi < pool.query_count(); ++qi) {
    const PooledQuery& q = pool.query(qi);
    binio::write_string(os, q.id);
    binio::write_u64(os, q.docs.size());
    for (const PooledDocument& doc : q.docs) {
      binio::write_i32(os, doc.relevance);
      for (const double v : doc.features) binio::write_f64(os, v);
    }
  }
  if (!os) throw std::runtime_error("failed writing pool cache '" + path + "'");
}

QueryPool load_pool(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open pool cache '" + path + "'");
  char magic[4];
  if (!is.read(magic, 4) || std::string_view(magic, 4) != std::string_view(kPoolMagic, 4))
    throw std::runtime_error("pool cache '" + path + "': bad magic");
  const std::uint32_t version = binio::read_u32(is);
  if (version != kPoolVersion)
    throw std::runtime_error("pool cache '" + path + "': unsupported version " +
                             std::to_string(version));

  QueryPool pool;
  pool.kind_ = binio::read_u32(is) == 0 ? DatasetKind::Mslr : DatasetKind::Mq2008;
  pool.feature_dim_ = binio::read_u64(is);
  pool.bounds_.resize(pool.feature_dim_);
  for (auto& [lo, hi] : pool.bounds_) {
    lo = binio::read_f64(is);
    hi = binio::read_f64(is);
  }
  const std::uint64_t n_queries = binio::read_u64(is);
  const int max_label = max_relevance(pool.kind_);
  pool.queries_.resize(n_queries);
  for (PooledQuery& q : pool.queries_) {
    q.id = binio::read_string(is);
    q.docs.resize(binio::read_u64(is));
    for (PooledDocument& doc : q.docs) {
      doc.relevance = binio::read_i32(is);
      if (doc.relevance < 0 || doc.relevance > max_label)
        throw std::runtime_error("pool cache '" + path + "': corrupt relevance label");
      doc.features.resize(pool.feature_dim_);
      for (double& v : doc.features) v = binio::read_f64(is);
    }
    q.buckets = build_buckets(q, max_label);
  }
  return pool;
}

}  // namespace edgerec
