#include "sishu/graph.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "sishu/error.hpp"

namespace sishu::graph {

namespace {

using nlohmann::json;

std::string edge_key(const Edge& e) {
  std::string k = e.src;
  k += '\x1f';
  k += e.dst;
  k += '\x1f';
  k += ontology::to_string(e.relation);
  return k;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

bool is_weighted(RelationType r) {
  switch (r) {
    case RelationType::SIMILAR_TO:
    case RelationType::CONTEXTUALIZES:
    case RelationType::CO_OCCURS_WITH:
    case RelationType::BELONGS_TO_CLUSTER:
    case RelationType::EXPRESSES_CONCEPT:
      return true;
    default:
      return false;
  }
}

std::string node_id(EntityClass cls, std::string_view key) {
  std::string id(ontology::to_string(cls));
  id += ':';
  id += key;
  return id;
}

Edge make_edge(std::string src, std::string dst, RelationType r, std::optional<double> weight) {
  const auto method = ontology::generation_method(r);
  return Edge{std::move(src), std::move(dst), r, weight, method,
              method != GenerationMethod::Semi};
}

const Node& Graph::add_node(Node node) {
  if (node.layer != ontology::home_layer(node.cls)) {
    throw Error(ErrorCode::SchemaViolation, "node " + node.id + " is outside its home layer");
  }
  if (auto it = index_.find(node.id); it != index_.end()) {
    const Node& existing = nodes_[it->second];
    if (existing.cls != node.cls) {
      throw Error(ErrorCode::SchemaViolation, "node id " + node.id + " reused across classes");
    }
    return existing;
  }
  index_.emplace(node.id, nodes_.size());
  nodes_.push_back(std::move(node));
  incident_.emplace_back();
  return nodes_.back();
}

const Node& Graph::add_node(EntityClass cls, std::string_view key, nlohmann::json attrs) {
  Node n;
  n.id = node_id(cls, key);
  n.cls = cls;
  n.layer = ontology::home_layer(cls);
  n.attrs = std::move(attrs);
  return add_node(std::move(n));
}

void Graph::check_edge(const Edge& e) const {
  const Node* s = find(e.src);
  const Node* d = find(e.dst);
  if (s == nullptr || d == nullptr) {
    throw Error(ErrorCode::SchemaViolation,
                "edge " + e.src + " -> " + e.dst + " has an unknown endpoint");
  }
  if (!ontology::validate_edge(e.relation, s->cls, d->cls)) {
    throw Error(ErrorCode::SchemaViolation,
                std::string(ontology::to_string(e.relation)) + " not allowed from " +
                    std::string(ontology::to_string(s->cls)) + " to " +
                    std::string(ontology::to_string(d->cls)));
  }
  if (is_weighted(e.relation) != e.weight.has_value()) {
    throw Error(ErrorCode::SchemaViolation,
                std::string(ontology::to_string(e.relation)) +
                    (e.weight ? " must not carry a weight" : " requires a weight"));
  }
}

void Graph::add_edge(Edge edge) {
  if (!add_edge_once(edge)) {
    throw Error(ErrorCode::SchemaViolation, "duplicate edge " + edge_key(edge));
  }
}

bool Graph::add_edge_once(Edge edge) {
  check_edge(edge);
  if (!edge_keys_.insert(edge_key(edge)).second) return false;
  const std::size_t k = edges_.size();
  const std::size_t s = index_.at(edge.src);
  const std::size_t d = index_.at(edge.dst);
  incident_[s].push_back(k);
  if (d != s) incident_[d].push_back(k);
  edges_.push_back(std::move(edge));
  return true;
}

const Node* Graph::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &nodes_[it->second];
}

Node* Graph::find_mutable(std::string_view id) {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &nodes_[it->second];
}

std::optional<std::size_t> Graph::index_of(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

double density(std::size_t nodes, std::size_t edges) {
  if (nodes < 2) throw Error(ErrorCode::EmptyGraph, "density needs at least 2 nodes");
  const double n = static_cast<double>(nodes);
  return static_cast<double>(edges) / (n * (n - 1.0));
}

GraphStats stats(const Graph& g) {
  GraphStats s;
  s.node_count = g.node_count();
  s.edge_count = g.edge_count();
  s.density = density(s.node_count, s.edge_count);

  std::map<Layer, std::size_t> layer_nodes;
  std::map<Layer, std::size_t> layer_edges;
  for (const auto& n : g.nodes()) {
    ++s.class_counts[std::string(ontology::to_string(n.cls))];
    ++layer_nodes[n.layer];
  }
  for (const auto& e : g.edges()) {
    ++s.relation_counts[std::string(ontology::to_string(e.relation))];
    const Node& a = g.nodes()[*g.index_of(e.src)];
    const Node& b = g.nodes()[*g.index_of(e.dst)];
    if (ontology::is_cross_layer(e.relation, a.cls, b.cls)) {
      ++s.cross_layer_edges;
    } else {
      ++layer_edges[a.layer];
    }
  }
  for (const auto& [name, count] : s.relation_counts) {
    s.relation_shares[name] = s.edge_count == 0 ? 0.0
                                                : static_cast<double>(count) /
                                                      static_cast<double>(s.edge_count);
  }
  for (Layer l : ontology::kAllLayers) {
    const std::size_t n = layer_nodes[l];
    s.layer_density[std::string(ontology::to_string(l))] = n < 2 ? 0.0 : density(n, layer_edges[l]);
  }
  s.cross_layer_ratio = s.edge_count == 0 ? 0.0
                                          : static_cast<double>(s.cross_layer_edges) /
                                                static_cast<double>(s.edge_count);
  return s;
}

nlohmann::json GraphStats::to_json() const {
  return json{{"node_count", node_count},
              {"edge_count", edge_count},
              {"density", density},
              {"class_counts", class_counts},
              {"relation_counts", relation_counts},
              {"relation_shares", relation_shares},
              {"layer_density", layer_density},
              {"cross_layer_edges", cross_layer_edges},
              {"cross_layer_ratio", cross_layer_ratio}};
}

std::string GraphStats::to_table() const {
  std::ostringstream out;
  out << "nodes            " << node_count << '\n'
      << "edges            " << edge_count << '\n'
      << "density          " << fixed(density, 9) << '\n'
      << "cross-layer      " << cross_layer_edges << " (" << fixed(cross_layer_ratio * 100, 2)
      << "%)\n\nclass                       nodes\n";
  for (const auto& [name, count] : class_counts) {
    out << name << std::string(name.size() < 28 ? 28 - name.size() : 1, ' ') << count << '\n';
  }
  out << "\nrelation                    edges    share\n";
  for (const auto& [name, count] : relation_counts) {
    const std::string c = std::to_string(count);
    out << name << std::string(name.size() < 28 ? 28 - name.size() : 1, ' ') << c
        << std::string(c.size() < 9 ? 9 - c.size() : 1, ' ')
        << fixed(relation_shares.at(name) * 100, 2) << "%\n";
  }
  out << "\nlayer                       density\n";
  for (const auto& [name, d] : layer_density) {
    out << name << std::string(name.size() < 28 ? 28 - name.size() : 1, ' ') << fixed(d, 6)
        << '\n';
  }
  return out.str();
}

std::size_t count_violations(const Graph& g) {
  std::size_t bad = 0;
  for (const auto& e : g.edges()) {
    const Node* s = g.find(e.src);
    const Node* d = g.find(e.dst);
    if (s == nullptr || d == nullptr || !ontology::validate_edge(e.relation, s->cls, d->cls) ||
        is_weighted(e.relation) != e.weight.has_value()) {
      ++bad;
    }
  }
  return bad;
}

nlohmann::json node_payload(const Node& n) {
  return json{{"id", n.id},
              {"class", ontology::to_string(n.cls)},
              {"layer", ontology::to_string(n.layer)},
              {"attrs", n.attrs}};
}

nlohmann::json edge_payload(const Edge& e) {
  return json{{"src", e.src},
              {"dst", e.dst},
              {"relation", ontology::to_string(e.relation)},
              {"weight", e.weight ? json(*e.weight) : json(nullptr)}};
}

std::string serialize(const Graph& g) {
  std::string out;
  const json header = {{"type", "header"},
                       {"format_version", g.header.format_version},
                       {"corpus_hash", g.header.corpus_hash},
                       {"embedder_id", g.header.embedder_id},
                       {"seeds", g.header.seeds},
                       {"config", g.header.config},
                       {"node_count", g.node_count()},
                       {"edge_count", g.edge_count()}};
  out += header.dump();
  out += '\n';
  for (const auto& n : g.nodes()) {
    json row = {{"type", "node"},
                {"id", n.id},
                {"class", ontology::to_string(n.cls)},
                {"attrs", n.attrs}};
    if (!n.vector.empty()) row["vector"] = n.vector;
    out += row.dump();
    out += '\n';
  }
  for (const auto& e : g.edges()) {
    json row = {{"type", "edge"},
                {"src", e.src},
                {"dst", e.dst},
                {"relation", ontology::to_string(e.relation)},
                {"method", ontology::to_string(e.method)},
                {"verified", e.verified}};
    if (e.weight) row["weight"] = *e.weight;
    out += row.dump();
    out += '\n';
  }
  return out;
}

void save(const Graph& g, const std::filesystem::path& path) {
  const std::string data = serialize(g);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

Graph deserialize(std::string_view data) {
  std::istringstream in{std::string(data)};
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::SchemaVersionMismatch, "graph file has no header");
  }
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception&) {
    throw Error(ErrorCode::SchemaVersionMismatch, "graph file header is unreadable");
  }
  if (!header.is_object() || header.value("type", "") != "header" ||
      !header.contains("format_version") || header["format_version"] != kFormatVersion) {
    throw Error(ErrorCode::SchemaVersionMismatch,
                "expected graph format version " + std::to_string(kFormatVersion));
  }

  Graph g;
  std::size_t line_no = 1;
  try {
    g.header.corpus_hash = header.at("corpus_hash").get<std::string>();
    g.header.embedder_id = header.at("embedder_id").get<std::string>();
    g.header.seeds = header.at("seeds");
    g.header.config = header.at("config");
    const auto want_nodes = header.at("node_count").get<std::size_t>();
    const auto want_edges = header.at("edge_count").get<std::size_t>();

    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const json row = json::parse(line);
      const std::string type = row.at("type").get<std::string>();
      if (type == "node") {
        const auto cls = ontology::class_from_string(row.at("class").get<std::string>());
        if (!cls) throw Error(ErrorCode::SerializationError, "unknown class");
        Node n;
        n.id = row.at("id").get<std::string>();
        n.cls = *cls;
        n.layer = ontology::home_layer(*cls);
        n.attrs = row.at("attrs");
        if (row.contains("vector")) n.vector = row["vector"].get<std::vector<double>>();
        if (g.find(n.id) != nullptr) throw Error(ErrorCode::SerializationError, "duplicate node");
        g.add_node(std::move(n));
      } else if (type == "edge") {
        const auto rel = ontology::relation_from_string(row.at("relation").get<std::string>());
        const auto method = ontology::method_from_string(row.at("method").get<std::string>());
        if (!rel || !method) throw Error(ErrorCode::SerializationError, "unknown relation");
        Edge e;
        e.src = row.at("src").get<std::string>();
        e.dst = row.at("dst").get<std::string>();
        e.relation = *rel;
        e.method = *method;
        e.verified = row.at("verified").get<bool>();
        if (row.contains("weight")) e.weight = row["weight"].get<double>();
        g.add_edge(std::move(e));
      } else {
        throw Error(ErrorCode::SerializationError, "unknown record type " + type);
      }
    }
    if (g.node_count() != want_nodes || g.edge_count() != want_edges) {
      throw Error(ErrorCode::SerializationError,
                  "expected " + std::to_string(want_nodes) + " nodes and " +
                      std::to_string(want_edges) + " edges, found " +
                      std::to_string(g.node_count()) + " and " + std::to_string(g.edge_count()));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SerializationError,
                "line " + std::to_string(line_no) + ": " + e.what());
  }
  return g;
}

Graph load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize(buf.str());
}

}  // namespace sishu::graph
