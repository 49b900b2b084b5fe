#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <random>
#include <thread>

#include "../test_support.hpp"
#include "sishu/embedding.hpp"
#include "sishu/error.hpp"

using namespace sishu;
using embedding::Mode;
using embedding::Vector;

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

/// Local embedding service on an ephemeral port that counts its calls.
class FakeService {
 public:
  explicit FakeService(std::function<void(const httplib::Request&, httplib::Response&)> h) {
    svr_.Post("/embed", [this, h](const httplib::Request& req, httplib::Response& res) {
      ++calls;
      h(req, res);
    });
    port_ = svr_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { svr_.listen_after_bind(); });
    svr_.wait_until_ready();
  }
  ~FakeService() {
    svr_.stop();
    thread_.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/embed"; }

  std::atomic<int> calls{0};

 private:
  httplib::Server svr_;
  int port_ = 0;
  std::thread thread_;
};

void reply_vector(const httplib::Request&, httplib::Response& res) {
  res.set_content(R"({"vector":[3.0,4.0]})", "application/json");
}

}  // namespace

TEST_SUITE("embedding") {
  TEST_CASE("cosine basics") {
    const auto x = Vector::normalized({1.0, 2.0, 3.0});
    CHECK(embedding::cosine(x, x) == doctest::Approx(1.0));
    CHECK(embedding::cosine(Vector::normalized({1, 0}), Vector::normalized({0, 1})) == 0.0);
    CHECK(code_of([&] { embedding::cosine(x, Vector::normalized({1, 0})); }) ==
          ErrorCode::DimMismatch);
  }

  TEST_CASE("cosine matches a direct dot product") {
    std::mt19937_64 rng(9);
    for (int t = 0; t < 50; ++t) {
      const auto a = testing::random_raw(rng, 32);
      const auto b = testing::random_raw(rng, 32);
      CHECK(std::abs(embedding::cosine(Vector::normalized(a), Vector::normalized(b)) -
                     testing::raw_cosine(a, b)) < 1e-12);
    }
  }

  TEST_CASE("zero input becomes the flagged first basis vector") {
    const auto z = Vector::normalized({0.0, 0.0, 0.0});
    CHECK(z.flagged());
    CHECK(z.values()[0] == 1.0);
    const auto e = embedding::hash_embed("", Mode::Passage, 8, 0);
    CHECK(e.dim() == 8);
  }

  TEST_CASE("hash embedder is deterministic and mode-sensitive") {
    const embedding::HashEmbedder h(256, 1);
    CHECK(h.embed("學而時習之", Mode::Passage) == h.embed("學而時習之", Mode::Passage));
    CHECK_FALSE(h.embed("學而時習之", Mode::Passage) == h.embed("學而時習之", Mode::Query));
    CHECK_FALSE(embedding::HashEmbedder(256, 2).embed("x", Mode::Passage) ==
                h.embed("x", Mode::Passage));
    double norm = 0.0;
    for (double v : h.embed("a b c", Mode::Query).values()) norm += v * v;
    CHECK(norm == doctest::Approx(1.0));
  }

  TEST_CASE("disjoint texts are nearly orthogonal at large dim") {
    std::mt19937_64 rng(4);
    int ok = 0;
    for (int t = 0; t < 100; ++t) {
      std::string a;
      std::string b;
      for (int i = 0; i < 8; ++i) {
        a += "a" + std::to_string(rng() % 100000) + " ";
        b += "b" + std::to_string(rng() % 100000) + " ";
      }
      const double c = embedding::cosine(embedding::hash_embed(a, Mode::Passage, 4096, 0),
                                         embedding::hash_embed(b, Mode::Passage, 4096, 0));
      // The shared "passage:" prefix token contributes a fixed positive term.
      if (std::abs(c) < 0.3) ++ok;
    }
    CHECK(ok == 100);
  }

  TEST_CASE("file provider") {
    testing::TempDir dir("file");
    testing::write_file(dir / "v.jsonl",
                        R"({"key":"passage: 仁","vector":[2,0]})" "\n"
                        R"({"key":"義","vector":[0,5]})" "\n");
    const embedding::FileProvider p(dir / "v.jsonl");
    CHECK(p.dim() == 2);
    CHECK(p.embed("仁", Mode::Passage).values()[0] == doctest::Approx(1.0));
    CHECK(p.embed("義", Mode::Query).values()[1] == doctest::Approx(1.0));
    CHECK(code_of([&] { p.embed("禮", Mode::Passage); }) == ErrorCode::KeyMiss);
    CHECK(code_of([&] { p.embed("仁", Mode::Query); }) == ErrorCode::KeyMiss);
  }

  TEST_CASE("http provider caches in memory and on disk") {
    FakeService svc(reply_vector);
    testing::TempDir dir("http");
    embedding::HttpOptions opts;
    opts.endpoint = svc.endpoint();
    opts.cache_path = dir / "cache.jsonl";
    {
      const embedding::HttpProvider p(opts);
      const auto v = p.embed("仁", Mode::Passage);
      CHECK(v.values()[0] == doctest::Approx(0.6));
      CHECK(p.embed("仁", Mode::Passage) == v);
      CHECK(svc.calls == 1);
      p.embed("仁", Mode::Query);
      CHECK(svc.calls == 2);
    }
    const embedding::HttpProvider again(opts);
    again.embed("仁", Mode::Passage);
    CHECK(svc.calls == 2);
  }

  TEST_CASE("http provider retries then fails, never falls back") {
    FakeService down([](const httplib::Request&, httplib::Response& res) { res.status = 503; });
    embedding::HttpOptions opts;
    opts.endpoint = down.endpoint();
    opts.max_attempts = 3;
    const embedding::HttpProvider p(opts);
    CHECK(code_of([&] { p.embed("x", Mode::Passage); }) == ErrorCode::Transport);
    CHECK(down.calls == 3);

    FakeService junk([](const httplib::Request&, httplib::Response& res) {
      res.set_content("{\"nope\":1}", "application/json");
    });
    opts.endpoint = junk.endpoint();
    const embedding::HttpProvider q(opts);
    CHECK(code_of([&] { q.embed("x", Mode::Passage); }) == ErrorCode::BadResponse);
  }

  TEST_CASE("http provider sends the bearer token") {
    std::string seen;
    FakeService svc([&](const httplib::Request& req, httplib::Response& res) {
      seen = req.get_header_value("Authorization");
      reply_vector(req, res);
    });
    embedding::HttpOptions opts;
    opts.endpoint = svc.endpoint();
    opts.auth_token = "t0k";
    embedding::HttpProvider(opts).embed("x", Mode::Query);
    CHECK(seen == "Bearer t0k");
  }

  TEST_CASE("provider selectors") {
    CHECK(embedding::make_provider("hash")->dim() == 256);
    CHECK(embedding::make_provider("hash:dim=64:seed=3")->dim() == 64);
    CHECK(embedding::make_provider("hash:dim=64:seed=3")->id() ==
          embedding::HashEmbedder(64, 3).id());
    CHECK(code_of([] { embedding::make_provider("http"); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { embedding::make_provider("magic"); }) == ErrorCode::InvalidArgument);
  }

  TEST_CASE("cluster examples") {
    using Item = std::pair<std::string, Vector>;
    std::vector<Item> same;
    for (int i = 0; i < 4; ++i) same.emplace_back("s" + std::to_string(i), Vector::normalized({1, 1}));
    CHECK(embedding::cluster(same, 0.75).size() == 1);

    std::vector<Item> ortho;
    for (std::size_t i = 0; i < 4; ++i) ortho.emplace_back("o" + std::to_string(i), Vector::normalized(testing::basis(4, i)));
    CHECK(embedding::cluster(ortho, 0.5).size() == 4);

    // Two tight bundles around e0 and e1.
    std::vector<Item> bundles;
    std::vector<std::vector<double>> raw;
    for (int i = 0; i < 6; ++i) {
      std::vector<double> v = testing::basis(3, i % 2 == 0 ? 0 : 1);
      v[2] = 0.05 * (i + 1);
      raw.push_back(v);
      bundles.emplace_back("b" + std::to_string(i), Vector::normalized(v));
    }
    for (std::size_t i = 0; i < raw.size(); ++i) {
      for (std::size_t j = 0; j < raw.size(); ++j) {
        if (i % 2 == j % 2) CHECK(testing::raw_cosine(raw[i], raw[j]) > 0.9);
        else CHECK(testing::raw_cosine(raw[i], raw[j]) < 0.1);
      }
    }
    const auto cs = embedding::cluster(bundles, 0.75);
    REQUIRE(cs.size() == 2);
    CHECK(cs[0].member_ids == std::vector<std::string>{"b0", "b2", "b4"});
    CHECK(cs[1].member_ids == std::vector<std::string>{"b1", "b3", "b5"});
    CHECK(cs[0].leader_similarity[0] == doctest::Approx(1.0));
    CHECK_THROWS_AS(embedding::cluster(bundles, 0.0), Error);
  }

  TEST_CASE("caching provider memoizes") {
    const embedding::HashEmbedder h;
    const embedding::CachingProvider c(h);
    CHECK(c.embed("仁", Mode::Passage) == h.embed("仁", Mode::Passage));
    CHECK(c.id() == h.id());
  }
}
