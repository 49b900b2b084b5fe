#include <doctest.h>

#include "../test_support.hpp"
#include "sishu/benchmark.hpp"
#include "sishu/error.hpp"
#include "sishu/retrieval.hpp"

using namespace sishu;
using namespace sishu::retrieval;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::Io;
}

const std::vector<Document> kToy = {{"d1", "cat sat mat"}, {"d2", "Cat cat dog bird"}, {"d3", "fish swims"}};

}  // namespace

TEST_SUITE("retrieval") {
  TEST_CASE("analyze folds case and drops punctuation-only tokens") {
    // Attached punctuation stays part of the token, as in tokenize().
    CHECK(analyze("Cat, DOG! 仁。") == std::vector<std::string>{"cat,", "dog!", "仁"});
    CHECK(analyze("- Học -") == std::vector<std::string>{"học"});
  }

  TEST_CASE("BM25 matches the hand-evaluated formula") {
    const Bm25Index idx(kToy);
    CHECK(idx.average_length() == doctest::Approx(3.0));
    const auto r = idx.search("cat", 5);
    REQUIRE(r.items.size() == 2);
    const double d1 = testing::bm25_oracle(3, 2, 1, 3, 3);
    const double d2 = testing::bm25_oracle(3, 2, 2, 4, 3);
    const auto& first = r.items[0].doc_id == "d1" ? r.items[0] : r.items[1];
    const auto& second = r.items[0].doc_id == "d1" ? r.items[1] : r.items[0];
    CHECK(std::abs(first.score - d1) < 1e-9);
    CHECK(std::abs(second.score - d2) < 1e-9);
    CHECK(r.items[0].score >= r.items[1].score);
    CHECK(std::abs(idx.idf("cat") - std::log(1.0 + 1.5 / 2.5)) < 1e-12);
  }

  TEST_CASE("BM25 edge cases") {
    const std::vector<Document> one = {{"only", "仁 義"}};
    const Bm25Index idx(one);
    CHECK(idx.search("仁", 5).ids() == std::vector<std::string>{"only"});
    CHECK(idx.search("zzz", 5).items.empty());
    CHECK(Bm25Index(kToy).search("cat dog", 1).items.size() == 1);
    CHECK(code_of([] { Bm25Index({}).search("x", 1); }) == ErrorCode::EmptyIndex);
  }

  TEST_CASE("BM25 ties break by id") {
    const std::vector<Document> docs = {{"b", "x"}, {"a", "x"}, {"c", "x"}};
    CHECK(Bm25Index(docs).search("x", 3).ids() == std::vector<std::string>{"a", "b", "c"});
  }

  TEST_CASE("semantic search") {
    const embedding::HashEmbedder h;
    SemanticIndex idx;
    CHECK(code_of([&] { idx.search("x", h, 1); }) == ErrorCode::NoEmbeddings);
    idx.add("p1", h.embed("quân tử vụ bản", embedding::Mode::Passage));
    idx.add("p2", h.embed("hữu bằng tự viễn phương lai", embedding::Mode::Passage));
    idx.add("p3", h.embed("ôn cố nhi tri tân", embedding::Mode::Passage));
    CHECK(idx.search("hữu bằng tự viễn phương lai", h, 3).ids().front() == "p2");
    CHECK(idx.search("x", h, 10).items.size() == 3);
    CHECK(idx.search("x", h, 0).items.empty());
  }

  TEST_CASE("RRF examples") {
    RankedList a;
    a.items = {{"x", 9}, {"y", 8}};
    RankedList b;
    b.items = {{"x", 3}};
    const std::vector<RankedList> lists = {a, b};
    const auto f = rrf_fuse(lists, 60);
    CHECK(f.items[0].doc_id == "x");
    CHECK(f.items[0].score == doctest::Approx(2.0 / 61));
    CHECK(f.items[1].score == doctest::Approx(1.0 / 62));
    CHECK(f.method == Method::Hybrid);
  }

  TEST_CASE("RRF matches direct summation on random lists") {
    CHECK(testing::sweep_rrf(100, 77) == 0);
  }

  TEST_CASE("metric examples") {
    const std::vector<std::string> r = {"a", "b", "c", "d"};
    CHECK(precision_at_k(r, {"a", "b"}, 2) == 1.0);
    CHECK(ndcg_at_k(r, {"a", "b"}, 2) == doctest::Approx(1.0));
    CHECK(reciprocal_rank(r, {"d"}) == 0.25);
    CHECK(reciprocal_rank(r, {"z"}) == 0.0);
    CHECK(precision_at_k(r, {}, 2) == 0.0);
    CHECK(code_of([&] { precision_at_k(r, {"a"}, 0); }) == ErrorCode::InvalidArgument);
  }

  TEST_CASE("metrics match exhaustive oracles on up to four documents") {
    const auto s = testing::sweep_metrics(4);
    CHECK_MESSAGE(s.mismatches == 0, s.first_failure);
    CHECK(s.checked > 1000);
  }

  TEST_CASE("benchmark files") {
    const auto qs = load_benchmark(testing::data_dir() / "benchmarks" / "mini_queries.jsonl");
    CHECK(qs.size() == 10);
    CHECK(code_of([] { load_benchmark("/nonexistent.jsonl"); }) == ErrorCode::BadInput);
    testing::TempDir dir("bench");
    testing::write_file(dir / "bad.jsonl", "{\"query\":1}\n");
    CHECK(code_of([&] { load_benchmark(dir / "bad.jsonl"); }) == ErrorCode::BadInput);
  }

  TEST_CASE("run_benchmark averages per method") {
    const Bm25Index idx(kToy);
    const std::vector<BenchmarkQuery> qs = {{"cat", {"d1"}}, {"fish", {"d3"}}};
    const std::vector<Method> methods = {Method::BM25};
    const std::vector<int> ks = {1, 3};
    const auto rep = run_benchmark({&idx, nullptr, nullptr, 60}, qs, methods, ks);
    CHECK(rep.query_count == 2);
    const auto& m = rep.metrics.at(Method::BM25);
    // "cat" ranks d2 first (higher tf), "fish" ranks d3 first.
    CHECK(m.at("P@1") == doctest::Approx(0.5));
    CHECK(m.at("MRR") == doctest::Approx(0.75));
    CHECK(rep.to_json()["methods"].contains("bm25"));
    CHECK(code_of([&] { run_benchmark({&idx, nullptr, nullptr, 60}, {}, methods, ks); }) ==
          ErrorCode::EmptyQuerySet);
  }

  TEST_CASE("synthetic retrieval benchmark is seed-fixed") {
    const auto a = benchmark::synthetic_retrieval();
    const auto b = benchmark::synthetic_retrieval();
    CHECK(a.queries.size() == 40);
    REQUIRE(a.docs.size() == b.docs.size());
    for (std::size_t i = 0; i < a.docs.size(); ++i) CHECK(a.docs[i].text == b.docs[i].text);
  }

  TEST_CASE("span IoU") {
    CHECK(benchmark::span_iou(0, 10, 0, 10) == 1.0);
    CHECK(benchmark::span_iou(0, 10, 5, 15) == doctest::Approx(5.0 / 15));
    CHECK(benchmark::span_iou(0, 5, 5, 10) == 0.0);
  }
}
