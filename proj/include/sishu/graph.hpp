#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "sishu/ontology.hpp"

namespace sishu::graph {

using ontology::EntityClass;
using ontology::GenerationMethod;
using ontology::Layer;
using ontology::RelationType;

inline constexpr int kFormatVersion = 1;

struct Node {
  std::string id;  // "<CLASS>:<key>"
  EntityClass cls = EntityClass::SENTENCE;
  Layer layer = Layer::Textual;
  nlohmann::json attrs = nlohmann::json::object();
  /// Embedding payload; only EMBEDDING and SEMANTIC_CLUSTER nodes carry one.
  std::vector<double> vector;

  bool operator==(const Node&) const = default;
};

struct Edge {
  std::string src;
  std::string dst;
  RelationType relation = RelationType::CONTAINS;
  std::optional<double> weight;
  GenerationMethod method = GenerationMethod::Auto;
  bool verified = true;

  bool operator==(const Edge&) const = default;
};

/// Relations that carry a numeric weight (similarity or count).
bool is_weighted(RelationType r);

/// `<CLASS>:<key>`.
std::string node_id(EntityClass cls, std::string_view key);

/// Builds an edge with the relation's generation method; Semi edges start
/// unverified.
Edge make_edge(std::string src, std::string dst, RelationType r,
               std::optional<double> weight = std::nullopt);

struct GraphHeader {
  int format_version = kFormatVersion;
  std::string corpus_hash;
  std::string embedder_id;
  nlohmann::json seeds = nlohmann::json::object();
  nlohmann::json config = nlohmann::json::object();

  bool operator==(const GraphHeader&) const = default;
};

/// Typed property graph. Every insertion is checked against the ontology, so
/// a Graph never holds a schema violation.
class Graph {
 public:
  GraphHeader header;

  /// Adds a node, or returns the existing one when the id is taken by a node
  /// of the same class. Throws SchemaViolation on a class clash or a layer
  /// that is not the class's home layer.
  const Node& add_node(Node node);
  const Node& add_node(EntityClass cls, std::string_view key,
                       nlohmann::json attrs = nlohmann::json::object());

  /// Throws SchemaViolation for unknown endpoints, a disallowed class pair, a
  /// weight on an unweighted relation (or none on a weighted one), or a
  /// duplicate (src, dst, relation).
  void add_edge(Edge edge);
  /// Same checks, but returns false instead of throwing on a duplicate.
  bool add_edge_once(Edge edge);

  const Node* find(std::string_view id) const;
  Node* find_mutable(std::string_view id);
  std::optional<std::size_t> index_of(std::string_view id) const;

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  /// Indices into edges() of every edge touching node `i`, either direction.
  const std::vector<std::size_t>& incident(std::size_t i) const { return incident_[i]; }

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }

 private:
  void check_edge(const Edge& e) const;

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> incident_;
  std::unordered_map<std::string, std::size_t> index_;
  std::unordered_set<std::string> edge_keys_;
};

/// Directed density E / (N (N - 1)). Throws EmptyGraph for N < 2.
double density(std::size_t nodes, std::size_t edges);

struct GraphStats {
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  double density = 0.0;
  std::map<std::string, std::size_t> class_counts;
  std::map<std::string, std::size_t> relation_counts;
  std::map<std::string, double> relation_shares;
  /// Per layer: intra-layer edges over the layer's N (N - 1); 0 below 2 nodes.
  std::map<std::string, double> layer_density;
  std::size_t cross_layer_edges = 0;
  double cross_layer_ratio = 0.0;

  bool operator==(const GraphStats&) const = default;

  nlohmann::json to_json() const;
  std::string to_table() const;
};

/// Throws EmptyGraph for fewer than 2 nodes.
GraphStats stats(const Graph& g);

/// Re-checks every edge against the standard ontology; returns the number of
/// violations (0 for any Graph built through add_edge).
std::size_t count_violations(const Graph& g);

/// JSON form of a node or edge as used on the wire: no vector payload.
nlohmann::json node_payload(const Node& n);
nlohmann::json edge_payload(const Edge& e);

/// Line-delimited file: a header record, then nodes, then edges.
void save(const Graph& g, const std::filesystem::path& path);
std::string serialize(const Graph& g);

/// Throws SchemaVersionMismatch for a missing or foreign header and
/// SerializationError for malformed or truncated content; never returns a
/// partial graph.
Graph load(const std::filesystem::path& path);
Graph deserialize(std::string_view data);

}  // namespace sishu::graph
