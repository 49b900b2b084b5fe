#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <httplib.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <cstdlib>

#include "../test_support.hpp"
#include "sishu/graph.hpp"
#include "sishu/query.hpp"
#include "sishu/server.hpp"

using namespace sishu;
using json = nlohmann::json;

namespace {

struct Run {
  int exit_code = -1;
  std::string out;  // stdout and stderr interleaved
};

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

Run sishu_cli(const std::vector<std::string>& args, const std::string& env = {}) {
  std::string cmd = env.empty() ? "" : env + " ";
  cmd += quote(SISHU_CLI);
  for (const auto& a : args) cmd += " " + quote(a);
  cmd += " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string mini() { return testing::mini_corpus_dir().string(); }

/// `serve` as a child process; reads the bound port from its first line.
class Served {
 public:
  Served(const std::vector<std::string>& args, const char* bind_env) {
    int fds[2];
    REQUIRE(pipe(fds) == 0);
    pid_ = fork();
    REQUIRE(pid_ >= 0);
    if (pid_ == 0) {
      dup2(fds[1], STDOUT_FILENO);
      close(fds[0]);
      if (bind_env != nullptr) setenv("GRAPHILOSOPHY_BIND", bind_env, 1);
      std::vector<char*> argv;
      std::string bin = SISHU_CLI;
      argv.push_back(bin.data());
      std::vector<std::string> copy = args;
      for (auto& a : copy) argv.push_back(a.data());
      argv.push_back(nullptr);
      execv(bin.c_str(), argv.data());
      _exit(127);
    }
    close(fds[1]);
    out_ = fdopen(fds[0], "r");
    std::array<char, 512> line{};
    REQUIRE(fgets(line.data(), line.size(), out_) != nullptr);
    first_line = line.data();
    port = std::stoi(first_line.substr(first_line.rfind(':') + 1));
  }
  ~Served() {
    if (pid_ > 0) stop();
    if (out_ != nullptr) fclose(out_);
  }
  int stop() {
    kill(pid_, SIGTERM);
    int status = 0;
    waitpid(pid_, &status, 0);
    pid_ = -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string first_line;
  int port = 0;

 private:
  pid_t pid_ = -1;
  FILE* out_ = nullptr;
};

}  // namespace

TEST_CASE("validate reports a clean fixture") {
  const auto r = sishu_cli({"validate", "--corpus", mini()});
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("0 schema violations") != std::string::npos);
}

TEST_CASE("build is deterministic and records its config") {
  testing::TempDir dir("cli-build");
  const auto a = (dir / "a.jsonl").string();
  const auto b = (dir / "b.jsonl").string();
  REQUIRE(sishu_cli({"build", "--corpus", mini(), "--out", a}).exit_code == 0);
  REQUIRE(sishu_cli({"build", "--corpus", mini(), "--out", b}).exit_code == 0);
  CHECK(testing::read_file(a) == testing::read_file(b));
  const std::string data = testing::read_file(a);
  const auto header = json::parse(data.substr(0, data.find('\n')));
  CHECK(header["config"]["chunk"]["theta"] == 0.3);
  CHECK(header["seeds"].contains("verify_seed"));
  CHECK(std::filesystem::exists(a + ".verify.jsonl"));
  const auto verify = testing::read_file(a + ".verify.jsonl");
  CHECK(json::parse(verify.substr(0, verify.find('\n')))["type"] == "header");
}

TEST_CASE("stats density equals recomputation") {
  testing::TempDir dir("cli-stats");
  const auto g = (dir / "g.jsonl").string();
  REQUIRE(sishu_cli({"build", "--corpus", mini(), "--out", g}).exit_code == 0);
  const auto r = sishu_cli({"stats", "--graph", g, "--format", "json"});
  REQUIRE(r.exit_code == 0);
  const auto s = json::parse(r.out);
  const auto loaded = graph::load(g);
  const double n = static_cast<double>(loaded.node_count());
  CHECK(s["density"].get<double>() ==
        doctest::Approx(loaded.edge_count() / (n * (n - 1))).epsilon(1e-12));
  CHECK(sishu_cli({"stats", "--graph", g}).out.find("density") != std::string::npos);

  const auto counts =
      sishu_cli({"stats", "--nodes", "16468", "--edges", "71249", "--format", "json"});
  REQUIRE(counts.exit_code == 0);
  CHECK(std::abs(json::parse(counts.out)["density"].get<double>() - 0.000263) < 5e-7);
}

TEST_CASE("config file, --set and env layering") {
  testing::TempDir dir("cli-cfg");
  testing::write_file(dir / "run.toml", "[chunk]\ntheta = 0.5\nwindow = 2\n");
  const auto g = (dir / "g.jsonl").string();
  REQUIRE(sishu_cli({"build", "--corpus", mini(), "--out", g, "--config",
                     (dir / "run.toml").string(), "--set", "chunk.window=4"})
              .exit_code == 0);
  const std::string data = testing::read_file(g);
  const auto header = json::parse(data.substr(0, data.find('\n')));
  CHECK(header["config"]["chunk"]["theta"] == 0.5);
  CHECK(header["config"]["chunk"]["window"] == 4);
  const auto bad = sishu_cli({"build", "--corpus", mini(), "--out", g, "--set", "chunk.nope=1"});
  CHECK(bad.exit_code == 1);
  CHECK(bad.out.starts_with("BAD_INPUT"));
}

TEST_CASE("chunk writes a header and chunk rows") {
  testing::TempDir dir("cli-chunk");
  std::string doc;
  for (int i = 0; i < 30; ++i) doc += "Câu số " + std::to_string(i) + " bàn về nhân và lễ. ";
  testing::write_file(dir / "c.txt", doc);
  const auto r = sishu_cli({"chunk", "--input", (dir / "c.txt").string(), "--max-tokens", "40",
                            "--overlap", "5", "--min-chars", "0"});
  REQUIRE(r.exit_code == 0);
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  CHECK(json::parse(line)["type"] == "header");
  int rows = 0;
  while (std::getline(lines, line)) {
    const auto j = json::parse(line);
    CHECK(j["type"] == "chunk");
    CHECK(j["token_count"].get<int>() <= 40);
    ++rows;
  }
  CHECK(rows > 1);
  const auto fixed = sishu_cli({"chunk", "--input", (dir / "c.txt").string(), "--mode", "fixed"});
  CHECK(fixed.out.find("FixedFallback") != std::string::npos);
}

TEST_CASE("query and export agree with the server payload") {
  testing::TempDir dir("cli-query");
  const auto g = (dir / "g.jsonl").string();
  REQUIRE(sishu_cli({"build", "--corpus", mini(), "--out", g}).exit_code == 0);
  const auto q =
      sishu_cli({"query", "--graph", g, "--text", "曾子曰:吾日三省吾身", "--format", "graph-json"});
  REQUIRE(q.exit_code == 0);
  const auto payload = json::parse(q.out);
  CHECK(payload["seeds"] == json::array({"HAN_SENTENCE:LN.1-4.1.1"}));

  const auto out = (dir / "sub.json").string();
  REQUIRE(sishu_cli({"export", "--graph", g, "--format", "graph-json", "--seed",
                     "SENTENCE:LN.1-1.1.1", "--depth", "1", "--out", out})
              .exit_code == 0);
  const auto loaded = graph::load(g);
  const embedding::HashEmbedder h;
  const server::ApiService api(loaded, &h);
  const auto served = api.get("/subgraph", {{"seed", "SENTENCE:LN.1-1.1.1"}, {"depth", "1"}});
  std::string exported = testing::read_file(out);
  while (!exported.empty() && exported.back() == '\n') exported.pop_back();
  CHECK(exported == served.body);

  const auto onto = sishu_cli({"export", "--format", "ontology-json"});
  REQUIRE(onto.exit_code == 0);
  CHECK(json::parse(onto.out)["relations"].size() == 18);
}

TEST_CASE("eval reports and fails cleanly") {
  const auto missing = sishu_cli(
      {"eval", "--graph", "/nonexistent.jsonl", "--benchmark", "/nonexistent-bench.jsonl"});
  CHECK(missing.exit_code != 0);
  CHECK(missing.out.starts_with("BAD_INPUT"));
  CHECK(missing.out.find('\n') == missing.out.size() - 1);

  const auto synth = sishu_cli({"eval", "--synthetic", "retrieval", "--format", "json"});
  REQUIRE(synth.exit_code == 0);
  const auto j = json::parse(synth.out);
  CHECK(j["methods"]["semantic"]["P@1"] == 1.0);
}

TEST_CASE("argument errors exit 2 with one line") {
  const auto r = sishu_cli({"stats", "--format", "yaml"});
  CHECK(r.exit_code == 2);
  CHECK(r.out.starts_with("BAD_ARGUMENTS"));
  CHECK(sishu_cli({"frobnicate"}).exit_code == 2);
}

TEST_CASE("serve answers over HTTP and stops on SIGTERM") {
  testing::TempDir dir("cli-serve");
  const auto g = (dir / "g.jsonl").string();
  REQUIRE(sishu_cli({"build", "--corpus", mini(), "--out", g}).exit_code == 0);
  Served srv({"serve", "--graph", g, "--bind", "127.0.0.1:1"}, "127.0.0.1:0");
  CHECK(srv.port != 1);
  httplib::Client c("127.0.0.1", srv.port);
  auto concepts = c.Get("/concepts");
  REQUIRE(concepts);
  CHECK(concepts->status == 200);
  CHECK(json::parse(concepts->body)["count"] == 23);
  auto bad = c.Get("/search?q=&mode=exact");
  REQUIRE(bad);
  CHECK(bad->status == 400);
  CHECK(srv.stop() == 0);
}
