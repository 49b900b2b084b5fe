#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sishu::ontology {

enum class Layer { Meta, Textual, Linguistic, Conceptual, CommentarySpeaker, Semantic };

enum class EntityClass {
  DOMAIN,
  SCHOOL,
  BOOK,
  CHAPTER,
  SECTION,
  PAGE,
  SENTENCE,
  HAN_SENTENCE,
  HANVIET_SENTENCE,
  VIETNAMESE_SENTENCE,
  HAN_WORD,
  HANVIET_PRONUNCIATION,
  VIETNAMESE_MEANING,
  PHILOSOPHICAL_CONCEPT,
  EXPERT,
  COMMENTARY,
  COMMENTARY_CHUNK,
  SPEAKER,
  EMBEDDING,
  SEMANTIC_CLUSTER,
};

enum class RelationType {
  CONTAINS,
  FOLLOWS,
  APPEARS_IN,
  HAS_HAN_FORM,
  HAS_HANVIET_FORM,
  HAS_VIETNAMESE_TRANSLATION,
  TRANSLATES_TO,
  PRONOUNCED_AS,
  EXPRESSES_CONCEPT,
  RELATED_TO,
  CO_OCCURS_WITH,
  PROVIDES_COMMENTARY,
  EXPLAINS,
  CONTEXTUALIZES,
  QUOTES,
  SIMILAR_TO,
  BELONGS_TO_CLUSTER,
  HAS_SEMANTIC_REP,
};

enum class GenerationMethod { Auto, Semi, Manual };

inline constexpr std::size_t kLayerCount = 6;
inline constexpr std::size_t kEntityClassCount = 20;
inline constexpr std::size_t kRelationCount = 18;

inline constexpr std::array<Layer, kLayerCount> kAllLayers = {
    Layer::Meta,       Layer::Textual,           Layer::Linguistic,
    Layer::Conceptual, Layer::CommentarySpeaker, Layer::Semantic};

inline constexpr std::array<EntityClass, kEntityClassCount> kAllClasses = {
    EntityClass::DOMAIN,           EntityClass::SCHOOL,
    EntityClass::BOOK,             EntityClass::CHAPTER,
    EntityClass::SECTION,          EntityClass::PAGE,
    EntityClass::SENTENCE,         EntityClass::HAN_SENTENCE,
    EntityClass::HANVIET_SENTENCE, EntityClass::VIETNAMESE_SENTENCE,
    EntityClass::HAN_WORD,         EntityClass::HANVIET_PRONUNCIATION,
    EntityClass::VIETNAMESE_MEANING, EntityClass::PHILOSOPHICAL_CONCEPT,
    EntityClass::EXPERT,           EntityClass::COMMENTARY,
    EntityClass::COMMENTARY_CHUNK, EntityClass::SPEAKER,
    EntityClass::EMBEDDING,        EntityClass::SEMANTIC_CLUSTER};

inline constexpr std::array<RelationType, kRelationCount> kAllRelations = {
    RelationType::CONTAINS,
    RelationType::FOLLOWS,
    RelationType::APPEARS_IN,
    RelationType::HAS_HAN_FORM,
    RelationType::HAS_HANVIET_FORM,
    RelationType::HAS_VIETNAMESE_TRANSLATION,
    RelationType::TRANSLATES_TO,
    RelationType::PRONOUNCED_AS,
    RelationType::EXPRESSES_CONCEPT,
    RelationType::RELATED_TO,
    RelationType::CO_OCCURS_WITH,
    RelationType::PROVIDES_COMMENTARY,
    RelationType::EXPLAINS,
    RelationType::CONTEXTUALIZES,
    RelationType::QUOTES,
    RelationType::SIMILAR_TO,
    RelationType::BELONGS_TO_CLUSTER,
    RelationType::HAS_SEMANTIC_REP};

std::string_view to_string(Layer l);
std::string_view to_string(EntityClass c);
std::string_view to_string(RelationType r);
std::string_view to_string(GenerationMethod m);

std::optional<Layer> layer_from_string(std::string_view s);
std::optional<EntityClass> class_from_string(std::string_view s);
std::optional<RelationType> relation_from_string(std::string_view s);
std::optional<GenerationMethod> method_from_string(std::string_view s);

/// A relation name read from an external file. Child-to-parent aliases
/// (BELONGS_TO_SCHOOL, PART_OF_DOMAIN) map to CONTAINS with `reversed` set,
/// meaning the caller must swap source and target.
struct ImportedRelation {
  RelationType relation;
  bool reversed = false;
};
std::optional<ImportedRelation> import_relation(std::string_view s);

Layer home_layer(EntityClass c);
GenerationMethod generation_method(RelationType r);

using EndpointPair = std::pair<EntityClass, EntityClass>;

/// Schema of allowed (source, target) class pairs per relation. The standard
/// instance is immutable; copies may be extended from configuration.
class Ontology {
 public:
  static const Ontology& standard();

  bool allows(RelationType r, EntityClass src, EntityClass dst) const;
  const std::set<EndpointPair>& endpoints(RelationType r) const;
  void extend(RelationType r, EntityClass src, EntityClass dst);

  /// Machine-readable schema description (the `ontology.json` payload).
  std::string to_json() const;

 private:
  Ontology();
  std::array<std::set<EndpointPair>, kRelationCount> rules_;
};

/// Checks an edge against the standard schema.
bool validate_edge(RelationType r, EntityClass src, EntityClass dst);

/// True when the endpoint classes live in different layers.
bool is_cross_layer(RelationType r, EntityClass src, EntityClass dst);

}  // namespace sishu::ontology
