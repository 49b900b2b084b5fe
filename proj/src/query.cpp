#include "sishu/query.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "sishu/corpus.hpp"
#include "sishu/error.hpp"
#include "sishu/graph_build.hpp"

namespace sishu::query {

namespace {

using graph::EntityClass;
using graph::RelationType;

bool relation_allowed(const Filters& f, RelationType r) {
  return !f.relations || f.relations->contains(r);
}

/// Orders node indices by (level, id) and collects the induced edges that
/// pass the relation filter, in graph order.
Subgraph assemble(const Graph& g, const std::unordered_map<std::size_t, int>& level,
                  const Filters& filters, std::vector<std::string> seeds) {
  std::vector<std::size_t> order;
  order.reserve(level.size());
  for (const auto& [idx, lvl] : level) order.push_back(idx);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const int la = level.at(a);
    const int lb = level.at(b);
    if (la != lb) return la < lb;
    return g.nodes()[a].id < g.nodes()[b].id;
  });

  std::set<std::size_t> edge_idx;
  for (std::size_t idx : order) {
    for (std::size_t e : g.incident(idx)) {
      const auto& edge = g.edges()[e];
      if (!relation_allowed(filters, edge.relation)) continue;
      if (level.contains(*g.index_of(edge.src)) && level.contains(*g.index_of(edge.dst))) {
        edge_idx.insert(e);
      }
    }
  }
  Subgraph out;
  out.seeds = std::move(seeds);
  for (std::size_t idx : order) out.nodes.push_back(g.nodes()[idx]);
  for (std::size_t e : edge_idx) out.edges.push_back(g.edges()[e]);
  return out;
}

std::unordered_map<std::size_t, int> bfs_levels(const Graph& g,
                                                std::span<const std::string> seeds, int depth,
                                                const Filters& filters,
                                                std::vector<std::string>& seed_ids) {
  if (depth < 0) throw Error(ErrorCode::InvalidArgument, "depth must be >= 0");
  std::unordered_map<std::size_t, int> level;
  std::vector<std::size_t> frontier;
  for (const auto& s : seeds) {
    const auto idx = g.index_of(s);
    if (!idx) throw Error(ErrorCode::UnknownSeed, "unknown seed " + s);
    if (level.emplace(*idx, 0).second) {
      frontier.push_back(*idx);
      seed_ids.push_back(s);
    }
  }
  for (int d = 1; d <= depth && !frontier.empty(); ++d) {
    std::vector<std::size_t> next;
    for (std::size_t u : frontier) {
      for (std::size_t e : g.incident(u)) {
        const auto& edge = g.edges()[e];
        if (!relation_allowed(filters, edge.relation)) continue;
        const std::size_t s = *g.index_of(edge.src);
        const std::size_t v = s == u ? *g.index_of(edge.dst) : s;
        if (level.contains(v)) continue;
        if (filters.layers && !filters.layers->contains(g.nodes()[v].layer)) continue;
        level.emplace(v, d);
        next.push_back(v);
      }
    }
    frontier = std::move(next);
  }
  return level;
}

std::set<EntityClass> embedded_classes(const Graph& g) {
  std::set<EntityClass> out;
  const auto& cfg = g.header.config;
  if (cfg.is_object() && cfg.contains("embed_classes") && cfg["embed_classes"].is_array()) {
    for (const auto& name : cfg["embed_classes"]) {
      if (auto c = ontology::class_from_string(name.get<std::string>())) out.insert(*c);
    }
  }
  if (out.empty()) out = graph::BuildConfig{}.embed_classes;
  return out;
}

}  // namespace

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::Auto: return "auto";
    case Mode::Exact: return "exact";
    case Mode::Semantic: return "semantic";
    case Mode::Hybrid: return "hybrid";
  }
  return "?";
}

std::optional<Mode> mode_from_string(std::string_view s) {
  for (auto m : {Mode::Auto, Mode::Exact, Mode::Semantic, Mode::Hybrid}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

nlohmann::json subgraph_payload(const Subgraph& s) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : s.nodes) nodes.push_back(graph::node_payload(n));
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : s.edges) edges.push_back(graph::edge_payload(e));
  return {{"schema_version", 1}, {"nodes", nodes}, {"edges", edges}, {"seeds", s.seeds}};
}

const std::set<EntityClass>& exact_match_classes() {
  static const std::set<EntityClass> classes = {
      EntityClass::HAN_SENTENCE, EntityClass::HANVIET_SENTENCE, EntityClass::VIETNAMESE_SENTENCE,
      EntityClass::COMMENTARY_CHUNK, EntityClass::HAN_WORD};
  return classes;
}

std::vector<std::string> exact_match(const Graph& g, std::string_view text) {
  const std::string needle = corpus::normalize_text(text);
  std::vector<std::string> out;
  if (needle.empty()) return out;
  for (const auto& n : g.nodes()) {
    if (!exact_match_classes().contains(n.cls)) continue;
    const auto it = n.attrs.find("text");
    if (it == n.attrs.end() || !it->is_string()) continue;
    if (it->get_ref<const std::string&>().find(needle) != std::string::npos) out.push_back(n.id);
  }
  return out;
}

Subgraph bfs_subgraph(const Graph& g, std::span<const std::string> seeds, int depth,
                      const Filters& filters) {
  std::vector<std::string> seed_ids;
  const auto level = bfs_levels(g, seeds, depth, filters, seed_ids);
  return assemble(g, level, filters, std::move(seed_ids));
}

std::string embedding_source(const Graph& g, std::string_view embedding_id) {
  const auto idx = g.index_of(embedding_id);
  if (!idx) return {};
  for (std::size_t e : g.incident(*idx)) {
    const auto& edge = g.edges()[e];
    if (edge.relation == RelationType::HAS_SEMANTIC_REP && edge.dst == embedding_id) {
      return edge.src;
    }
  }
  return {};
}

std::string concept_id(const Graph& g, std::string_view ref) {
  if (const auto* n = g.find(ref); n != nullptr && n->cls == EntityClass::PHILOSOPHICAL_CONCEPT) {
    return n->id;
  }
  const std::string id = graph::node_id(EntityClass::PHILOSOPHICAL_CONCEPT, ref);
  if (g.find(id) != nullptr) return id;
  throw Error(ErrorCode::UnknownConcept, "unknown concept " + std::string(ref));
}

Subgraph concept_pair_query(const Graph& g, std::string_view a, std::string_view b, int depth) {
  const std::string ia = concept_id(g, a);
  const std::string ib = concept_id(g, b);
  const std::vector<std::string> seeds = ia == ib ? std::vector<std::string>{ia}
                                                  : std::vector<std::string>{ia, ib};
  std::vector<std::string> seed_ids;
  auto level = bfs_levels(g, seeds, depth, {}, seed_ids);
  for (const auto& s : seeds) {
    for (std::size_t e : g.incident(*g.index_of(s))) {
      const auto& edge = g.edges()[e];
      if (edge.relation == RelationType::EXPRESSES_CONCEPT) {
        level.emplace(*g.index_of(edge.src), 1);
      }
    }
  }
  return assemble(g, level, {}, std::move(seed_ids));
}

Engine::Engine(const Graph& g, const embedding::Provider* embedder, retrieval::Bm25Params bm25,
               int k_rrf)
    : graph_(g), embedder_(embedder), k_rrf_(k_rrf) {
  const auto classes = embedded_classes(g);
  std::vector<retrieval::Document> docs;
  for (const auto& n : g.nodes()) {
    if (classes.contains(n.cls)) docs.push_back({n.id, graph::embedding_text(n)});
    if (n.cls == EntityClass::EMBEDDING && !n.vector.empty() && !n.attrs.value("flagged", false)) {
      semantic_.add(n.id, embedding::Vector::normalized(n.vector));
    }
  }
  bm25_ = std::make_unique<retrieval::Bm25Index>(docs, bm25);
}

retrieval::RankedList Engine::search(std::string_view text, retrieval::Method method,
                                     std::size_t k) const {
  using retrieval::Method;
  auto semantic = [&](std::size_t depth) {
    if (embedder_ == nullptr) throw Error(ErrorCode::NoEmbeddings, "no embedder configured");
    auto list = semantic_.search(text, *embedder_, depth);
    for (auto& item : list.items) item.doc_id = embedding_source(graph_, item.doc_id);
    return list;
  };
  if (method == Method::BM25) return bm25_->search(text, k);
  if (method == Method::Semantic) return semantic(k);
  const std::size_t depth = std::max<std::size_t>(k, 100);
  const std::vector<retrieval::RankedList> lists = {bm25_->search(text, depth), semantic(depth)};
  auto fused = retrieval::rrf_fuse(lists, k_rrf_);
  if (fused.items.size() > k) fused.items.resize(k);
  return fused;
}

std::vector<std::string> Engine::semantic_seeds(std::string_view text, int max_seeds) const {
  if (max_seeds < 1) throw Error(ErrorCode::InvalidArgument, "max_seeds must be >= 1");
  return search(text, retrieval::Method::Semantic, static_cast<std::size_t>(max_seeds)).ids();
}

QueryResult Engine::run(const QueryRequest& req) const {
  if (req.max_seeds < 1) throw Error(ErrorCode::InvalidArgument, "max_seeds must be >= 1");
  const auto cap = static_cast<std::size_t>(req.max_seeds);
  QueryResult out;
  std::vector<std::string> seeds;
  auto add = [&](const std::vector<std::string>& ids) {
    for (const auto& id : ids) {
      if (seeds.size() >= cap) break;
      if (std::find(seeds.begin(), seeds.end(), id) == seeds.end()) seeds.push_back(id);
    }
  };
  switch (req.mode) {
    case Mode::Exact:
      out.resolved_mode = Mode::Exact;
      add(exact_match(graph_, req.text));
      break;
    case Mode::Semantic:
      out.resolved_mode = Mode::Semantic;
      add(semantic_seeds(req.text, req.max_seeds));
      break;
    case Mode::Hybrid:
      out.resolved_mode = Mode::Hybrid;
      add(exact_match(graph_, req.text));
      add(semantic_seeds(req.text, req.max_seeds));
      break;
    case Mode::Auto: {
      const auto exact = exact_match(graph_, req.text);
      if (!exact.empty()) {
        out.resolved_mode = Mode::Exact;
        add(exact);
      } else {
        out.resolved_mode = Mode::Semantic;
        add(semantic_seeds(req.text, req.max_seeds));
      }
      break;
    }
  }
  out.subgraph = bfs_subgraph(graph_, seeds, req.depth, req.filters);
  return out;
}

}  // namespace sishu::query
