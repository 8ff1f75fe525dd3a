#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "edgerec/letor.hpp"

using namespace edgerec;

namespace {

// Builds a one-query pool whose buckets hold the given number of documents
// per relevance label. Feature values are unique per document.
QueryPool pool_with_buckets(DatasetKind kind, const std::vector<std::size_t>& counts,
                            std::size_t min_docs = kSlateSize) {
  std::vector<DocumentRecord> records;
  double v = 0.0;
  for (std::size_t rel = 0; rel < counts.size(); ++rel)
    for (std::size_t i = 0; i < counts[rel]; ++i)
      records.push_back({static_cast<int>(rel), "q1", {v += 1.0}});
  return QueryPool::build(records, kind, min_docs);
}

// Independent reference for the slate's relevance multiset: walks the
// priority list over bucket occupancy counts only.
std::multiset<int> reference_slate_multiset(DatasetKind kind,
                                            std::vector<std::size_t> counts) {
  const std::vector<int>& priority = priority_list(kind);
  std::multiset<int> out;
  for (std::size_t round = 0; round < kSlateSize; ++round) {
    int bucket = priority[round % priority.size()];
    if (counts[static_cast<std::size_t>(bucket)] == 0) {
      bucket = -1;
      for (const int candidate : priority)
        if (counts[static_cast<std::size_t>(candidate)] > 0) {
          bucket = candidate;
          break;
        }
      REQUIRE(bucket >= 0);
    }
    --counts[static_cast<std::size_t>(bucket)];
    out.insert(bucket);
  }
  return out;
}

std::multiset<int> slate_multiset(const CandidateSlate& slate) {
  return {slate.relevances.begin(), slate.relevances.end()};
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_SUITE("letor") {

TEST_CASE("parses a full line with comment") {
  const DocumentRecord rec = parse_letor_line("2 qid:10 1:0.5 2:-0.25 #doc");
  CHECK(rec.relevance == 2);
  CHECK(rec.query_id == "10");
  REQUIRE(rec.features.size() == 2);
  CHECK(rec.features[0] == 0.5);
  CHECK(rec.features[1] == -0.25);
}

TEST_CASE("parses a minimal line") {
  const DocumentRecord rec = parse_letor_line("0 qid:7 1:0.0");
  CHECK(rec.relevance == 0);
  CHECK(rec.query_id == "7");
  REQUIRE(rec.features.size() == 1);
  CHECK(rec.features[0] == 0.0);
}

TEST_CASE("missing sparse indices default to zero") {
  const DocumentRecord rec = parse_letor_line("4 qid:1 2:1.0");
  CHECK(rec.relevance == 4);
  REQUIRE(rec.features.size() == 2);
  CHECK(rec.features[0] == 0.0);
  CHECK(rec.features[1] == 1.0);
}

TEST_CASE("parse errors name the column") {
  CHECK_THROWS_AS(parse_letor_line(""), ParseError);
  CHECK_THROWS_AS(parse_letor_line("   # just a comment"), ParseError);
  CHECK_THROWS_AS(parse_letor_line("x qid:1 1:0.5"), ParseError);
  CHECK_THROWS_AS(parse_letor_line("2 qid: 1:0.5"), ParseError);
  CHECK_THROWS_AS(parse_letor_line("2 1:0.5"), ParseError);
  CHECK_THROWS_AS(parse_letor_line("2 qid:1 1:abc"), ParseError);
  CHECK_THROWS_AS(parse_letor_line("2 qid:1 0:1.0"), ParseError);
  CHECK_THROWS_AS(parse_letor_line("2 qid:1 1:0.5 1:0.7"), ParseError);

  try {
    parse_letor_line("2 qid:1 1:bad");
  } catch (const ParseError& e) {
    CHECK(e.column() == 9);
    CHECK(std::string(e.what()).find("column 9") != std::string::npos);
  }
}

TEST_CASE("serialize/parse round-trip preserves the record") {
  Rng rng(42);
  for (int iter = 0; iter < 50; ++iter) {
    DocumentRecord rec;
    rec.relevance = static_cast<int>(rng.uniform_below(5));
    rec.query_id = std::to_string(1 + rng.uniform_below(9999));
    rec.features.resize(1 + rng.uniform_below(12));
    for (double& f : rec.features) f = rng.uniform(-10.0, 10.0);

    const DocumentRecord again = parse_letor_line(serialize_letor_line(rec));
    CHECK(again.relevance == rec.relevance);
    CHECK(again.query_id == rec.query_id);
    CHECK(again.features == rec.features);
  }
  // Explicit pairs from a hand-written line survive the round trip.
  const DocumentRecord parsed = parse_letor_line("3 qid:12 1:0.5 3:-2.75");
  const DocumentRecord reparsed = parse_letor_line(serialize_letor_line(parsed));
  CHECK(reparsed.relevance == parsed.relevance);
  CHECK(reparsed.query_id == parsed.query_id);
  CHECK(reparsed.features == parsed.features);
}

TEST_CASE("normalization maps dataset min/max to -1/+1") {
  std::vector<DocumentRecord> records = {
      {0, "a", {0.0}}, {1, "a", {5.0}}, {2, "a", {10.0}},
      {0, "a", {0.0}}, {1, "a", {5.0}},
  };
  const QueryPool pool = QueryPool::build(records, DatasetKind::Mslr);
  REQUIRE(pool.query_count() == 1);
  const PooledQuery& q = pool.query(0);
  CHECK(q.docs[0].features[0] == -1.0);
  CHECK(q.docs[1].features[0] == 0.0);
  CHECK(q.docs[2].features[0] == 1.0);
  CHECK(pool.feature_bounds()[0] == std::pair<double, double>{0.0, 10.0});
}

TEST_CASE("constant dimensions normalize to zero") {
  std::vector<DocumentRecord> records(5, DocumentRecord{1, "a", {3.0, 1.0}});
  records[4].features[1] = 2.0;
  const QueryPool pool = QueryPool::build(records, DatasetKind::Mq2008);
  for (const PooledDocument& doc : pool.query(0).docs) CHECK(doc.features[0] == 0.0);
}

TEST_CASE("queries below min_docs are dropped") {
  std::vector<DocumentRecord> records;
  for (int i = 0; i < 5; ++i) records.push_back({1, "big", {static_cast<double>(i)}});
  for (int i = 0; i < 3; ++i) records.push_back({1, "small", {static_cast<double>(i)}});
  const QueryPool pool = QueryPool::build(records, DatasetKind::Mslr);
  REQUIRE(pool.query_count() == 1);
  CHECK(pool.query(0).id == "big");
}

TEST_CASE("pool build rejects bad input") {
  CHECK_THROWS_AS(QueryPool::build({}, DatasetKind::Mslr), std::invalid_argument);
  CHECK_THROWS_AS(
      QueryPool::build({{0, "a", {1.0}}, {0, "a", {1.0, 2.0}}}, DatasetKind::Mslr),
      std::invalid_argument);
  CHECK_THROWS_AS(QueryPool::build({{3, "a", {1.0}}}, DatasetKind::Mq2008),
                  std::invalid_argument);
}

TEST_CASE("normalizing an already-normalized pool is the identity") {
  Rng rng(3);
  std::vector<DocumentRecord> records;
  for (int q = 0; q < 4; ++q)
    for (int d = 0; d < 6; ++d) {
      DocumentRecord rec{static_cast<int>(rng.uniform_below(3)), std::to_string(q), {}};
      for (int j = 0; j < 3; ++j) rec.features.push_back(rng.uniform(-7.0, 13.0));
      records.push_back(std::move(rec));
    }
  const QueryPool pool = QueryPool::build(records, DatasetKind::Mq2008);

  std::vector<DocumentRecord> normalized;
  for (std::size_t qi = 0; qi < pool.query_count(); ++qi)
    for (const PooledDocument& doc : pool.query(qi).docs)
      normalized.push_back({doc.relevance, pool.query(qi).id, doc.features});
  const QueryPool again = QueryPool::build(normalized, DatasetKind::Mq2008);

  REQUIRE(again.query_count() == pool.query_count());
  for (std::size_t qi = 0; qi < pool.query_count(); ++qi) {
    REQUIRE(again.query(qi).docs.size() == pool.query(qi).docs.size());
    for (std::size_t di = 0; di < pool.query(qi).docs.size(); ++di)
      for (std::size_t j = 0; j < pool.feature_dim(); ++j)
        CHECK(again.query(qi).docs[di].features[j] ==
              doctest::Approx(pool.query(qi).docs[di].features[j]).epsilon(1e-15));
  }
}

TEST_CASE("sample_query is uniform and seeded") {
  std::vector<DocumentRecord> records;
  for (const char* qid : {"a", "b"})
    for (int i = 0; i < 5; ++i) records.push_back({1, qid, {static_cast<double>(i)}});
  const QueryPool pool = QueryPool::build(records, DatasetKind::Mslr);

  Rng rng(11);
  const int n = 10000;
  int count_a = 0;
  for (int i = 0; i < n; ++i)
    if (sample_query(pool, rng) == 0) ++count_a;
  // 5 sigma around the binomial mean.
  const double sigma = std::sqrt(0.25 * n);
  CHECK(std::abs(count_a - n / 2) < 5.0 * sigma);

  Rng r1(99), r2(99);
  for (int i = 0; i < 100; ++i) CHECK(sample_query(pool, r1) == sample_query(pool, r2));

  const QueryPool empty_pool =
      QueryPool::build({{1, "tiny", {0.0}}}, DatasetKind::Mslr);  // dropped: < 5 docs
  CHECK(empty_pool.query_count() == 0);
  Rng r3(1);
  CHECK_THROWS_AS(sample_query(empty_pool, r3), std::runtime_error);
}

TEST_CASE("full buckets give one document per priority entry") {
  const QueryPool pool = pool_with_buckets(DatasetKind::Mslr, {1, 1, 1, 1, 1});
  Rng rng(5);
  const CandidateSlate slate = select_candidates(pool, 0, rng);
  CHECK(slate_multiset(slate) == std::multiset<int>{0, 1, 2, 3, 4});
  // Selection order follows the priority list when every bucket is filled.
  CHECK(slate.relevances == std::array<int, 5>{4, 0, 2, 3, 1});
}

TEST_CASE("missing bucket substitutes from the head of the priority list") {
  // No relevance-2 documents: an extra 4 fills the gap.
  const QueryPool pool = pool_with_buckets(DatasetKind::Mslr, {1, 1, 0, 1, 2});
  Rng rng(5);
  const CandidateSlate slate = select_candidates(pool, 0, rng);
  CHECK(slate_multiset(slate) == std::multiset<int>{4, 4, 0, 3, 1});
}

TEST_CASE("two missing buckets substitute an extra 0 and an extra 3") {
  // No relevance-4 and no relevance-2 documents.
  const QueryPool pool = pool_with_buckets(DatasetKind::Mslr, {2, 1, 0, 2, 0});
  Rng rng(5);
  const CandidateSlate slate = select_candidates(pool, 0, rng);
  CHECK(slate_multiset(slate) == std::multiset<int>{0, 0, 3, 3, 1});
}

TEST_CASE("slate composition depends only on bucket occupancy") {
  // Exhaustive over occupancies 0..5 per bucket; a bucket with more than
  // five documents behaves like one with five, since a slate takes five.
  for (const DatasetKind kind : {DatasetKind::Mslr, DatasetKind::Mq2008}) {
    const std::size_t n_buckets = static_cast<std::size_t>(max_relevance(kind)) + 1;
    const std::size_t n_choices = 6;
    std::vector<std::size_t> counts(n_buckets, 0);
    const std::size_t patterns =
        static_cast<std::size_t>(std::pow(n_choices, n_buckets));
    for (std::size_t code = 0; code < patterns; ++code) {
      std::size_t c = code, total = 0;
      for (std::size_t b = 0; b < n_buckets; ++b) {
        counts[b] = c % n_choices;
        total += counts[b];
        c /= n_choices;
      }
      if (total < kSlateSize) continue;
      const QueryPool pool = pool_with_buckets(kind, counts);
      const std::multiset<int> expected = reference_slate_multiset(kind, counts);
      for (const std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        Rng rng(seed);
        CHECK(slate_multiset(select_candidates(pool, 0, rng)) == expected);
      }
    }
  }
}

TEST_CASE("within-bucket choice is without replacement") {
  const QueryPool pool = pool_with_buckets(DatasetKind::Mslr, {0, 0, 0, 0, 6});
  Rng rng(17);
  const CandidateSlate slate = select_candidates(pool, 0, rng);
  std::set<int> distinct(slate.doc_indices.begin(), slate.doc_indices.end());
  CHECK(distinct.size() == kSlateSize);
}

TEST_CASE("select_candidates rejects undersized queries defensively") {
  const QueryPool pool = pool_with_buckets(DatasetKind::Mslr, {1, 1, 1, 0, 0},
                                           /*min_docs=*/1);
  Rng rng(1);
  CHECK_THROWS_AS(select_candidates(pool, 0, rng), std::runtime_error);
}

TEST_CASE("pool cache round-trips bit-exactly") {
  Rng rng(8);
  std::vector<DocumentRecord> records;
  for (int q = 0; q < 6; ++q)
    for (int d = 0; d < 7; ++d) {
      DocumentRecord rec{static_cast<int>(rng.uniform_below(5)), "q" + std::to_string(q), {}};
      for (int j = 0; j < 4; ++j) rec.features.push_back(rng.uniform(-3.0, 3.0));
      records.push_back(std::move(rec));
    }
  const QueryPool pool = QueryPool::build(records, DatasetKind::Mslr);

  const std::string path = temp_path("edgerec_pool_cache_test.bin");
  save_pool(pool, path);
  const QueryPool loaded = load_pool(path);
  CHECK(loaded == pool);

  const std::string path2 = temp_path("edgerec_pool_cache_test2.bin");
  save_pool(loaded, path2);
  std::ifstream a(path, std::ios::binary), b(path2, std::ios::binary);
  const std::string bytes_a((std::istreambuf_iterator<char>(a)), {});
  const std::string bytes_b((std::istreambuf_iterator<char>(b)), {});
  CHECK(bytes_a == bytes_b);
  std::remove(path.c_str());
  std::remove(path2.c_str());
}

TEST_CASE("load_letor_file reports the offending line") {
  const std::string path = temp_path("edgerec_bad_letor.txt");
  {
    std::ofstream os(path);
    os << "1 qid:1 1:0.5\n";
    os << "\n";
    os << "2 qid:1 1:oops\n";
  }
  try {
    load_letor_file(path);
    FAIL("expected a ParseError");
  } catch (const ParseError& e) {
    const std::string what = e.what();
    CHECK(what.find(":3:") != std::string::npos);
  }
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_letor_file(temp_path("edgerec_missing_file.txt")),
                  std::runtime_error);
}

}  // TEST_SUITE
