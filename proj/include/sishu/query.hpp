#pragma once

#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sishu/embedding.hpp"
#include "sishu/graph.hpp"
#include "sishu/retrieval.hpp"

namespace sishu::query {

using graph::Graph;

enum class Mode { Auto, Exact, Semantic, Hybrid };

std::string_view to_string(Mode m);
std::optional<Mode> mode_from_string(std::string_view s);

struct Filters {
  std::optional<std::set<graph::Layer>> layers;
  std::optional<std::set<graph::RelationType>> relations;
};

struct Subgraph {
  std::vector<graph::Node> nodes;
  std::vector<graph::Edge> edges;
  std::vector<std::string> seeds;
};

/// Wire payload: {nodes:[{id,class,layer,attrs}], edges:[{src,dst,relation,
/// weight}], seeds:[...]} plus schema_version.
nlohmann::json subgraph_payload(const Subgraph& s);

/// Node classes searched by exact_match.
const std::set<graph::EntityClass>& exact_match_classes();

/// Ids of nodes whose `text` attribute contains the normalized query, in
/// graph order. An empty query matches nothing.
std::vector<std::string> exact_match(const Graph& g, std::string_view text);

/// Nodes within `depth` undirected hops of any seed. A layer filter limits
/// which nodes may be entered (seeds are always kept); a relation filter
/// limits which edges are traversed and returned. Edges are the induced set.
/// Nodes are ordered by BFS level, then id. Throws UnknownSeed.
Subgraph bfs_subgraph(const Graph& g, std::span<const std::string> seeds, int depth,
                      const Filters& filters = {});

/// Maps EMBEDDING node ids back to their source node through HAS_SEMANTIC_REP.
std::string embedding_source(const Graph& g, std::string_view embedding_id);

/// Resolves a concept by character or full node id. Throws UnknownConcept.
std::string concept_id(const Graph& g, std::string_view concept_ref);

/// Union of both concepts' neighbourhoods plus every sentence expressing
/// either concept; the induced edges include links between the two.
Subgraph concept_pair_query(const Graph& g, std::string_view a, std::string_view b,
                            int depth = 1);

struct QueryRequest {
  std::string text;
  Mode mode = Mode::Auto;
  int depth = 1;
  int max_seeds = 10;
  Filters filters;
};

struct QueryResult {
  Mode resolved_mode = Mode::Exact;
  Subgraph subgraph;
};

/// Read-only search facade over a loaded graph: lexical, semantic and fused
/// ranking over the embedded source nodes, plus seeded subgraph queries.
class Engine {
 public:
  Engine(const Graph& g, const embedding::Provider* embedder, retrieval::Bm25Params bm25 = {},
         int k_rrf = 60);

  const Graph& graph() const noexcept { return graph_; }
  bool has_embeddings() const noexcept { return semantic_.size() > 0; }

  /// Ranked source-node ids. Semantic results are mapped from EMBEDDING
  /// nodes to their sources.
  retrieval::RankedList search(std::string_view text, retrieval::Method method,
                               std::size_t k) const;

  /// Top `max_seeds` semantic hits as source node ids. Throws NoEmbeddings.
  std::vector<std::string> semantic_seeds(std::string_view text, int max_seeds) const;

  /// Auto picks Exact when the text matches verbatim, else Semantic; Hybrid
  /// takes exact matches first, then semantic ones, capped at max_seeds.
  QueryResult run(const QueryRequest& req) const;

 private:
  const Graph& graph_;
  const embedding::Provider* embedder_;
  int k_rrf_;
  std::unique_ptr<retrieval::Bm25Index> bm25_;
  retrieval::SemanticIndex semantic_;
};

}  // namespace sishu::query
