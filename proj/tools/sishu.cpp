// Command-line entry point: validate, build, stats, chunk, query, eval,
// serve and export.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sishu/benchmark.hpp"
#include "sishu/chunking.hpp"
#include "sishu/config.hpp"
#include "sishu/corpus.hpp"
#include "sishu/error.hpp"
#include "sishu/extraction.hpp"
#include "sishu/graph.hpp"
#include "sishu/graph_build.hpp"
#include "sishu/ontology.hpp"
#include "sishu/query.hpp"
#include "sishu/retrieval.hpp"
#include "sishu/server.hpp"

namespace {

using nlohmann::json;
using sishu::Error;
using sishu::ErrorCode;
using sishu::config::Config;

/// Flags that map onto Config keys; only the ones given on the command line
/// are applied, so they override the config file but not the environment.
struct CommonFlags {
  std::string config_path;
  std::optional<std::string> corpus;
  std::optional<std::string> concepts;
  std::optional<std::string> speakers;
  std::optional<std::string> embedder;
  std::optional<std::string> bind;
  std::vector<std::string> set;  // raw key=value overrides

  Config resolve() const {
    Config cfg;
    if (!config_path.empty()) sishu::config::apply_file(cfg, config_path);
    for (const auto& kv : set) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::BadInput, "--set expects key=value");
      sishu::config::apply(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (corpus) cfg.corpus_dir = *corpus;
    if (concepts) cfg.concepts_path = *concepts;
    if (speakers) cfg.speakers_path = *speakers;
    if (embedder) cfg.embedder = *embedder;
    if (bind) cfg.bind = *bind;
    sishu::config::apply_env(cfg);
    return cfg;
  }
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "key/value config file");
  cmd->add_option("--set", f.set, "override one config key (key=value), repeatable");
  cmd->add_option("--embedder", f.embedder, "hash[:dim=N:seed=S] | file:<path> | http[:<url>]");
}

std::unique_ptr<sishu::embedding::Provider> make_embedder(const Config& cfg,
                                                          std::string_view selector) {
  sishu::embedding::ProviderEnv env{cfg.embed_endpoint, cfg.embed_auth_token, cfg.embed_cache};
  return sishu::embedding::make_provider(selector, env, static_cast<std::size_t>(cfg.embed_dim),
                                         cfg.embed_seed);
}

/// Graph consumers default to the embedder recorded in the graph header so
/// query vectors live in the same space as the stored ones.
std::unique_ptr<sishu::embedding::Provider> graph_embedder(const Config& cfg,
                                                           const CommonFlags& flags,
                                                           const sishu::graph::Graph& g) {
  if (flags.embedder) return make_embedder(cfg, *flags.embedder);
  if (!g.header.embedder_id.empty()) return make_embedder(cfg, g.header.embedder_id);
  return make_embedder(cfg, cfg.embedder);
}

std::vector<sishu::extraction::ConceptDef> taxonomy_of(const Config& cfg) {
  return cfg.concepts_path.empty() ? sishu::extraction::default_taxonomy()
                                   : sishu::extraction::load_taxonomy(cfg.concepts_path);
}

std::vector<sishu::extraction::SpeakerPattern> speakers_of(const Config& cfg) {
  return cfg.speakers_path.empty() ? sishu::extraction::default_speakers()
                                   : sishu::extraction::load_speakers(cfg.speakers_path);
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << content;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

json header_record(const Config& cfg, const json& extra = json::object()) {
  json h = {{"type", "header"},
            {"config", cfg.to_json()},
            {"seeds", {{"verify_seed", cfg.build.verify_seed}, {"embed_seed", cfg.embed_seed}}}};
  for (const auto& [k, v] : extra.items()) h[k] = v;
  return h;
}

// validate ------------------------------------------------------------------

int cmd_validate(const CommonFlags& flags) {
  const Config cfg = flags.resolve();
  if (cfg.corpus_dir.empty()) throw Error(ErrorCode::BadInput, "--corpus is required");
  const auto corpus = sishu::corpus::load_corpus(cfg.corpus_dir, cfg.normalize);
  const auto embedder = make_embedder(cfg, cfg.embedder);
  sishu::graph::BuildReport report;
  const auto g = sishu::graph::build_graph(corpus, taxonomy_of(cfg), speakers_of(cfg), *embedder,
                                           cfg.build, &report);
  const auto violations = sishu::graph::count_violations(g);
  std::printf("sentences           %zu\n", corpus.sentences.size());
  std::printf("dictionary entries  %zu (%zu after consolidation)\n", corpus.dictionary_raw.size(),
              corpus.dictionary.size());
  std::printf("commentary entries  %zu (%zu dangling)\n", corpus.commentary.size(),
              corpus.dangling_count());
  std::printf("dictionary gaps     %zu\n", report.dictionary_gaps.size());
  std::printf("corpus hash         %s\n", corpus.hash.c_str());
  std::printf("%zu schema violations\n", violations);
  return violations == 0 ? 0 : 1;
}

// build ---------------------------------------------------------------------

int cmd_build(const CommonFlags& flags, const std::string& out_path) {
  const Config cfg = flags.resolve();
  if (cfg.corpus_dir.empty()) throw Error(ErrorCode::BadInput, "--corpus is required");
  const auto corpus = sishu::corpus::load_corpus(cfg.corpus_dir, cfg.normalize);
  const auto embedder = make_embedder(cfg, cfg.embedder);
  sishu::graph::BuildReport report;
  auto g = sishu::graph::build_graph(corpus, taxonomy_of(cfg), speakers_of(cfg), *embedder,
                                     cfg.build, &report);
  g.header.config = cfg.to_json();
  sishu::graph::save(g, out_path);

  std::string queue = header_record(cfg, {{"corpus_hash", corpus.hash}}).dump() + "\n";
  for (const auto& e : report.verification_queue) {
    json row = sishu::graph::edge_payload(e);
    row["type"] = "edge";
    row["method"] = sishu::ontology::to_string(e.method);
    row["verified"] = e.verified;
    queue += row.dump() + "\n";
  }
  write_file(out_path + ".verify.jsonl", queue);

  std::printf("wrote %s: %zu nodes, %zu edges\n", out_path.c_str(), g.node_count(),
              g.edge_count());
  std::printf("verification queue: %zu edges\n", report.verification_queue.size());
  std::printf("dictionary gaps: %zu; dangling commentary: %zu; fallback-chunked: %zu\n",
              report.dictionary_gaps.size(), report.dangling_commentary, report.fallback_chunked);
  return 0;
}

// stats ---------------------------------------------------------------------

int cmd_stats(const std::string& graph_path, const std::string& format,
              std::optional<std::size_t> nodes, std::optional<std::size_t> edges) {
  if (nodes || edges) {
    if (!nodes || !edges) throw Error(ErrorCode::BadInput, "--nodes and --edges go together");
    const double d = sishu::graph::density(*nodes, *edges);
    if (format == "json") {
      std::printf("%s\n", json{{"node_count", *nodes}, {"edge_count", *edges}, {"density", d}}
                              .dump()
                              .c_str());
    } else {
      std::printf("nodes    %zu\nedges    %zu\ndensity  %.6f\n", *nodes, *edges, d);
    }
    return 0;
  }
  if (graph_path.empty()) throw Error(ErrorCode::BadInput, "--graph is required");
  const auto g = sishu::graph::load(graph_path);
  const auto s = sishu::graph::stats(g);
  if (format == "json") {
    std::printf("%s\n", s.to_json().dump().c_str());
  } else {
    std::printf("%s", s.to_table().c_str());
  }
  return 0;
}

// chunk ---------------------------------------------------------------------

struct ChunkFlags {
  std::string input;
  std::string id;
  std::string out;
  std::string mode = "adaptive";
  std::optional<double> theta;
  std::optional<int> window;
  std::optional<int> max_tokens;
  std::optional<int> overlap;
  std::optional<int> min_chars;
};

int cmd_chunk(const CommonFlags& flags, const ChunkFlags& cf) {
  Config cfg = flags.resolve();
  auto& params = cfg.build.chunk;
  if (cf.theta) params.theta = *cf.theta;
  if (cf.window) params.window = *cf.window;
  if (cf.max_tokens) params.max_tokens = *cf.max_tokens;
  if (cf.overlap) params.overlap = *cf.overlap;
  if (cf.min_chars) params.min_chars = *cf.min_chars;
  params.validate();
  const std::string& input = cf.input;
  const std::string& out_path = cf.out;
  std::string source_id = cf.id;
  std::ifstream in(input, std::ios::binary);
  if (!in) throw Error(ErrorCode::BadInput, "cannot open " + input);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string doc = buf.str();
  if (source_id.empty()) source_id = std::filesystem::path(input).stem().string();

  const auto embedder = make_embedder(cfg, cfg.embedder);
  sishu::chunking::ChunkedDocument result;
  if (cf.mode == "fixed") {
    result.chunks = sishu::chunking::fixed_chunk(doc, params.max_tokens, params.overlap, source_id);
    result.coverage = sishu::chunking::validate_coverage(result.chunks, doc);
  } else {
    result = sishu::chunking::chunk_document(doc, *embedder, params, source_id);
  }
  std::string out = header_record(cfg, {{"embedder_id", embedder->id()},
                                        {"mode", cf.mode},
                                        {"source_id", source_id},
                                        {"coverage", result.coverage},
                                        {"fell_back", result.fell_back},
                                        {"chunk_count", result.chunks.size()}})
                        .dump() +
                    "\n";
  for (std::size_t i = 0; i < result.chunks.size(); ++i) {
    const auto& c = result.chunks[i];
    out += json{{"type", "chunk"},
                {"index", i},
                {"source_id", c.source_id},
                {"span", {c.span_begin, c.span_end}},
                {"bytes", {c.source_begin, c.source_end}},
                {"token_count", c.token_count},
                {"method", sishu::chunking::to_string(c.method)},
                {"overlap_bytes", c.overlap_bytes},
                {"text", c.text}}
               .dump() +
           "\n";
  }
  if (out_path.empty()) {
    std::fwrite(out.data(), 1, out.size(), stdout);
  } else {
    write_file(out_path, out);
    std::printf("wrote %zu chunks to %s (coverage %.4f%s)\n", result.chunks.size(),
                out_path.c_str(), result.coverage, result.fell_back ? ", fixed fallback" : "");
  }
  return 0;
}

// query ---------------------------------------------------------------------

struct QueryFlags {
  std::string graph;
  std::string text;
  std::string mode = "auto";
  int depth = 1;
  int max_seeds = 10;
  std::string layers;
  std::string relations;
  std::string format = "table";
};

sishu::query::Filters parse_filters(const std::string& layers, const std::string& relations) {
  sishu::query::Filters f;
  if (!layers.empty()) {
    f.layers.emplace();
    for (const auto& name : split_csv(layers)) {
      const auto l = sishu::ontology::layer_from_string(name);
      if (!l) throw Error(ErrorCode::InvalidArgument, "unknown layer " + name);
      f.layers->insert(*l);
    }
  }
  if (!relations.empty()) {
    f.relations.emplace();
    for (const auto& name : split_csv(relations)) {
      const auto r = sishu::ontology::relation_from_string(name);
      if (!r) throw Error(ErrorCode::InvalidArgument, "unknown relation " + name);
      f.relations->insert(*r);
    }
  }
  return f;
}

int cmd_query(const CommonFlags& flags, const QueryFlags& q) {
  const Config cfg = flags.resolve();
  const auto g = sishu::graph::load(q.graph);
  const auto embedder = graph_embedder(cfg, flags, g);
  const sishu::query::Engine engine(g, embedder.get(), cfg.bm25, cfg.k_rrf);
  const auto mode = sishu::query::mode_from_string(q.mode);
  if (!mode) throw Error(ErrorCode::InvalidArgument, "unknown mode " + q.mode);
  if (q.text.empty()) throw Error(ErrorCode::InvalidArgument, "--text must not be empty");

  sishu::query::QueryRequest req{q.text, *mode, q.depth, q.max_seeds,
                                 parse_filters(q.layers, q.relations)};
  const auto result = engine.run(req);
  if (q.format == "graph-json") {
    std::printf("%s\n", sishu::query::subgraph_payload(result.subgraph).dump().c_str());
    return 0;
  }
  const auto& sg = result.subgraph;
  std::printf("mode %s: %zu seeds, %zu nodes, %zu edges\n",
              std::string(sishu::query::to_string(result.resolved_mode)).c_str(),
              sg.seeds.size(), sg.nodes.size(), sg.edges.size());
  for (const auto& s : sg.seeds) std::printf("seed  %s\n", s.c_str());
  for (const auto& n : sg.nodes) {
    std::string text = sishu::graph::embedding_text(n);
    for (auto& ch : text) {
      if (ch == '\n') ch = ' ';
    }
    std::printf("node  %-22s %s  %s\n", std::string(sishu::ontology::to_string(n.cls)).c_str(),
                n.id.c_str(), text.c_str());
  }
  for (const auto& e : sg.edges) {
    std::printf("edge  %s -%s-> %s\n", e.src.c_str(),
                std::string(sishu::ontology::to_string(e.relation)).c_str(), e.dst.c_str());
  }
  return 0;
}

// eval ----------------------------------------------------------------------

struct EvalFlags {
  std::string graph;
  std::string benchmark;
  std::string synthetic;
  std::string methods = "bm25,semantic,hybrid";
  std::string ks = "1,3,5,10";
  std::string format = "table";
  std::string report;
};

std::vector<int> parse_ks(const std::string& s) {
  std::vector<int> out;
  for (const auto& item : split_csv(s)) {
    try {
      std::size_t used = 0;
      const int k = std::stoi(item, &used);
      if (used != item.size() || k <= 0) throw std::invalid_argument(item);
      out.push_back(k);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "bad k value " + item);
    }
  }
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, "--k is empty");
  return out;
}

std::vector<sishu::retrieval::Method> parse_methods(const std::string& s) {
  std::vector<sishu::retrieval::Method> out;
  for (const auto& item : split_csv(s)) {
    const auto m = sishu::retrieval::method_from_string(item);
    if (!m) throw Error(ErrorCode::InvalidArgument, "unknown method " + item);
    out.push_back(*m);
  }
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, "--methods is empty");
  return out;
}

void emit_report(const EvalFlags& f, const Config& cfg, const json& machine,
                 const std::string& human) {
  if (f.format == "json") {
    std::printf("%s\n", machine.dump().c_str());
  } else {
    std::printf("%s", human.c_str());
  }
  if (!f.report.empty()) {
    write_file(f.report, header_record(cfg).dump() + "\n" + machine.dump() + "\n");
  }
}

int cmd_eval(const CommonFlags& flags, const EvalFlags& f) {
  const Config cfg = flags.resolve();
  const auto methods = parse_methods(f.methods);
  const auto ks = parse_ks(f.ks);

  if (f.synthetic == "chunking") {
    const auto embedder = make_embedder(cfg, flags.embedder.value_or(cfg.embedder));
    const auto bench = sishu::benchmark::synthetic_chunking();
    const auto cmp = sishu::benchmark::compare_chunking(bench, *embedder, cfg.build.chunk);
    emit_report(f, cfg, cmp.to_json(), cmp.to_table());
    return 0;
  }

  std::vector<sishu::retrieval::Document> docs;
  std::vector<sishu::retrieval::BenchmarkQuery> queries;
  sishu::retrieval::SemanticIndex semantic;
  std::unique_ptr<sishu::embedding::Provider> embedder;

  if (f.synthetic == "retrieval") {
    auto bench = sishu::benchmark::synthetic_retrieval();
    docs = std::move(bench.docs);
    queries = std::move(bench.queries);
    embedder = make_embedder(cfg, flags.embedder.value_or(cfg.embedder));
    for (const auto& d : docs) {
      semantic.add(d.doc_id, embedder->embed(d.text, sishu::embedding::Mode::Passage));
    }
  } else if (!f.synthetic.empty()) {
    throw Error(ErrorCode::InvalidArgument, "--synthetic must be retrieval or chunking");
  } else {
    if (f.benchmark.empty()) throw Error(ErrorCode::BadInput, "--benchmark is required");
    queries = sishu::retrieval::load_benchmark(f.benchmark);
    if (f.graph.empty()) throw Error(ErrorCode::BadInput, "--graph is required");
    const auto g = sishu::graph::load(f.graph);
    embedder = graph_embedder(cfg, flags, g);
    // Documents are the embedded source nodes; vectors are the stored ones.
    std::set<sishu::ontology::EntityClass> classes = cfg.build.embed_classes;
    for (const auto& n : g.nodes()) {
      if (n.cls == sishu::ontology::EntityClass::EMBEDDING) {
        if (!n.vector.empty() && !n.attrs.value("flagged", false)) {
          semantic.add(n.attrs.value("source", ""),
                       sishu::embedding::Vector::normalized(n.vector));
        }
      } else if (classes.contains(n.cls)) {
        docs.push_back({n.id, sishu::graph::embedding_text(n)});
      }
    }
  }

  const sishu::retrieval::Bm25Index bm25(docs, cfg.bm25);
  const sishu::retrieval::BenchmarkSetup setup{&bm25, &semantic, embedder.get(), cfg.k_rrf};
  const auto report = sishu::retrieval::run_benchmark(setup, queries, methods, ks);
  emit_report(f, cfg, report.to_json(), report.to_table());
  return 0;
}

// serve ---------------------------------------------------------------------

int cmd_serve(const CommonFlags& flags, const std::string& graph_path,
              const std::vector<std::string>& cors) {
  Config cfg = flags.resolve();
  if (!cors.empty()) cfg.cors_origins = cors;
  const auto [host, port] = sishu::config::parse_bind(cfg.bind);
  const auto g = sishu::graph::load(graph_path);
  if (sishu::graph::count_violations(g) != 0) {
    throw Error(ErrorCode::SchemaViolation, "graph fails schema validation");
  }
  const auto embedder = graph_embedder(cfg, flags, g);
  const sishu::server::ApiService api(g, embedder.get(), cfg.bm25, cfg.k_rrf);
  sishu::server::HttpServer server(api, cfg.cors_origins);
  sishu::server::serve_until_signal(server, host, port, [&](int bound) {
    std::printf("serving %s on http://%s:%d\n", graph_path.c_str(), host.c_str(), bound);
    std::fflush(stdout);
  });
  return 0;
}

// export --------------------------------------------------------------------

int cmd_export(const CommonFlags& flags, const std::string& graph_path, const std::string& format,
               const std::vector<std::string>& seeds, int depth, const std::string& layers,
               const std::string& out_path) {
  std::string body;
  if (format == "ontology-json") {
    auto onto = json::parse(sishu::ontology::Ontology::standard().to_json());
    onto["schema_version"] = sishu::server::kSchemaVersion;
    body = onto.dump();
  } else if (format == "graph-json") {
    (void)flags.resolve();
    const auto g = sishu::graph::load(graph_path);
    sishu::query::Subgraph sg;
    if (seeds.empty()) {
      sg.nodes = g.nodes();
      sg.edges = g.edges();
    } else {
      sg = sishu::query::bfs_subgraph(g, seeds, depth, parse_filters(layers, ""));
    }
    body = sishu::query::subgraph_payload(sg).dump();
  } else {
    throw Error(ErrorCode::InvalidArgument, "--format must be graph-json or ontology-json");
  }
  if (out_path.empty() || out_path == "-") {
    std::printf("%s", body.c_str());
  } else {
    write_file(out_path, body);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sishu: tri-parallel classical text knowledge graph toolkit"};
  app.require_subcommand(1);
  CommonFlags common;

  auto* validate = app.add_subcommand("validate", "load a corpus and check it against the ontology");
  add_common(validate, common);
  validate->add_option("--corpus", common.corpus, "corpus directory")->required();
  validate->add_option("--concepts", common.concepts, "concept taxonomy JSON");
  validate->add_option("--speakers", common.speakers, "speaker marker JSON");

  std::string build_out;
  auto* build = app.add_subcommand("build", "build the knowledge graph");
  add_common(build, common);
  build->add_option("--corpus", common.corpus, "corpus directory");
  build->add_option("--concepts", common.concepts, "concept taxonomy JSON");
  build->add_option("--speakers", common.speakers, "speaker marker JSON");
  build->add_option("--out", build_out, "graph file to write")->required();

  std::string stats_graph;
  std::string stats_format = "table";
  std::optional<std::size_t> stats_nodes;
  std::optional<std::size_t> stats_edges;
  auto* stats = app.add_subcommand("stats", "graph statistics");
  stats->add_option("--graph", stats_graph, "graph file");
  stats->add_option("--format", stats_format, "table | json")
      ->check(CLI::IsMember({"table", "json"}));
  stats->add_option("--nodes", stats_nodes, "density from counts: node count");
  stats->add_option("--edges", stats_edges, "density from counts: edge count");

  ChunkFlags cf;
  auto* chunk = app.add_subcommand("chunk", "chunk a text file");
  add_common(chunk, common);
  chunk->add_option("--input", cf.input, "UTF-8 text file")->required();
  chunk->add_option("--id", cf.id, "source id (default: file stem)");
  chunk->add_option("--out", cf.out, "JSONL output (default: stdout)");
  chunk->add_option("--mode", cf.mode, "adaptive | fixed")
      ->check(CLI::IsMember({"adaptive", "fixed"}));
  chunk->add_option("--theta", cf.theta, "coherence boundary threshold");
  chunk->add_option("--window", cf.window, "coherence window");
  chunk->add_option("--max-tokens", cf.max_tokens, "maximum chunk tokens");
  chunk->add_option("--overlap", cf.overlap, "overlap tokens on size-forced splits");
  chunk->add_option("--min-chars", cf.min_chars, "minimum chunk characters");

  QueryFlags qf;
  auto* query = app.add_subcommand("query", "seeded subgraph query");
  add_common(query, common);
  query->add_option("--graph", qf.graph, "graph file")->required();
  query->add_option("--text", qf.text, "query text")->required();
  query->add_option("--mode", qf.mode, "auto | exact | semantic | hybrid")
      ->check(CLI::IsMember({"auto", "exact", "semantic", "hybrid"}));
  query->add_option("--depth", qf.depth, "BFS depth")->check(CLI::NonNegativeNumber);
  query->add_option("--max-seeds", qf.max_seeds, "seed cap")->check(CLI::PositiveNumber);
  query->add_option("--layers", qf.layers, "comma-separated layer filter");
  query->add_option("--relations", qf.relations, "comma-separated relation filter");
  query->add_option("--format", qf.format, "table | graph-json")
      ->check(CLI::IsMember({"table", "graph-json"}));

  EvalFlags ef;
  auto* eval = app.add_subcommand("eval", "retrieval or chunking evaluation");
  add_common(eval, common);
  eval->add_option("--graph", ef.graph, "graph file (documents are its embedded nodes)");
  eval->add_option("--benchmark", ef.benchmark, "JSONL {query, relevant_doc_ids}");
  eval->add_option("--synthetic", ef.synthetic, "retrieval | chunking (built-in benchmark)");
  eval->add_option("--methods", ef.methods, "comma-separated: bm25,semantic,hybrid");
  eval->add_option("--k", ef.ks, "comma-separated cutoffs");
  eval->add_option("--format", ef.format, "table | json")->check(CLI::IsMember({"table", "json"}));
  eval->add_option("--report", ef.report, "also write the JSON report to this file");

  std::string serve_graph;
  std::vector<std::string> serve_cors;
  auto* serve = app.add_subcommand("serve", "read-only HTTP API");
  add_common(serve, common);
  serve->add_option("--graph", serve_graph, "graph file")->required();
  serve->add_option("--bind", common.bind, "host:port (GRAPHILOSOPHY_BIND overrides)");
  serve->add_option("--cors", serve_cors, "allowed origin, repeatable ('*' for any)");

  std::string export_graph;
  std::string export_format = "graph-json";
  std::vector<std::string> export_seeds;
  int export_depth = 1;
  std::string export_layers;
  std::string export_out;
  auto* exp = app.add_subcommand("export", "write a visualization payload");
  add_common(exp, common);
  exp->add_option("--graph", export_graph, "graph file");
  exp->add_option("--format", export_format, "graph-json | ontology-json");
  exp->add_option("--seed", export_seeds, "subgraph seed, repeatable (default: whole graph)");
  exp->add_option("--depth", export_depth, "BFS depth")->check(CLI::NonNegativeNumber);
  exp->add_option("--layers", export_layers, "comma-separated layer filter");
  exp->add_option("--out", export_out, "output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    for (auto& ch : msg) {
      if (ch == '\n') ch = ' ';
    }
    std::fprintf(stderr, "BAD_ARGUMENTS: %s\n", msg.c_str());
    return 2;
  }

  try {
    if (*validate) return cmd_validate(common);
    if (*build) return cmd_build(common, build_out);
    if (*stats) return cmd_stats(stats_graph, stats_format, stats_nodes, stats_edges);
    if (*chunk) return cmd_chunk(common, cf);
    if (*query) return cmd_query(common, qf);
    if (*eval) return cmd_eval(common, ef);
    if (*serve) return cmd_serve(common, serve_graph, serve_cors);
    if (*exp) {
      return cmd_export(common, export_graph, export_format, export_seeds, export_depth,
                        export_layers, export_out);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "%s: %s\n", std::string(sishu::to_string(e.code())).c_str(), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "INTERNAL: %s\n", e.what());
    return 1;
  }
  return 0;
}
