#include "sishu/ontology.hpp"

#include <json.hpp>

namespace sishu::ontology {

namespace {

using C = EntityClass;
using R = RelationType;

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(std::string_view s, const std::array<Enum, N>& all) {
  for (Enum e : all) {
    if (to_string(e) == s) return e;
  }
  return std::nullopt;
}

std::size_t index(RelationType r) { return static_cast<std::size_t>(r); }

}  // namespace

std::string_view to_string(Layer l) {
  switch (l) {
    case Layer::Meta: return "Meta";
    case Layer::Textual: return "Textual";
    case Layer::Linguistic: return "Linguistic";
    case Layer::Conceptual: return "Conceptual";
    case Layer::CommentarySpeaker: return "CommentarySpeaker";
    case Layer::Semantic: return "Semantic";
  }
  return "?";
}

std::string_view to_string(EntityClass c) {
  switch (c) {
    case C::DOMAIN: return "DOMAIN";
    case C::SCHOOL: return "SCHOOL";
    case C::BOOK: return "BOOK";
    case C::CHAPTER: return "CHAPTER";
    case C::SECTION: return "SECTION";
    case C::PAGE: return "PAGE";
    case C::SENTENCE: return "SENTENCE";
    case C::HAN_SENTENCE: return "HAN_SENTENCE";
    case C::HANVIET_SENTENCE: return "HANVIET_SENTENCE";
    case C::VIETNAMESE_SENTENCE: return "VIETNAMESE_SENTENCE";
    case C::HAN_WORD: return "HAN_WORD";
    case C::HANVIET_PRONUNCIATION: return "HANVIET_PRONUNCIATION";
    case C::VIETNAMESE_MEANING: return "VIETNAMESE_MEANING";
    case C::PHILOSOPHICAL_CONCEPT: return "PHILOSOPHICAL_CONCEPT";
    case C::EXPERT: return "EXPERT";
    case C::COMMENTARY: return "COMMENTARY";
    case C::COMMENTARY_CHUNK: return "COMMENTARY_CHUNK";
    case C::SPEAKER: return "SPEAKER";
    case C::EMBEDDING: return "EMBEDDING";
    case C::SEMANTIC_CLUSTER: return "SEMANTIC_CLUSTER";
  }
  return "?";
}

std::string_view to_string(RelationType r) {
  switch (r) {
    case R::CONTAINS: return "CONTAINS";
    case R::FOLLOWS: return "FOLLOWS";
    case R::APPEARS_IN: return "APPEARS_IN";
    case R::HAS_HAN_FORM: return "HAS_HAN_FORM";
    case R::HAS_HANVIET_FORM: return "HAS_HANVIET_FORM";
    case R::HAS_VIETNAMESE_TRANSLATION: return "HAS_VIETNAMESE_TRANSLATION";
    case R::TRANSLATES_TO: return "TRANSLATES_TO";
    case R::PRONOUNCED_AS: return "PRONOUNCED_AS";
    case R::EXPRESSES_CONCEPT: return "EXPRESSES_CONCEPT";
    case R::RELATED_TO: return "RELATED_TO";
    case R::CO_OCCURS_WITH: return "CO_OCCURS_WITH";
    case R::PROVIDES_COMMENTARY: return "PROVIDES_COMMENTARY";
    case R::EXPLAINS: return "EXPLAINS";
    case R::CONTEXTUALIZES: return "CONTEXTUALIZES";
    case R::QUOTES: return "QUOTES";
    case R::SIMILAR_TO: return "SIMILAR_TO";
    case R::BELONGS_TO_CLUSTER: return "BELONGS_TO_CLUSTER";
    case R::HAS_SEMANTIC_REP: return "HAS_SEMANTIC_REP";
  }
  return "?";
}

std::string_view to_string(GenerationMethod m) {
  switch (m) {
    case GenerationMethod::Auto: return "Auto";
    case GenerationMethod::Semi: return "Semi";
    case GenerationMethod::Manual: return "Manual";
  }
  return "?";
}

std::optional<Layer> layer_from_string(std::string_view s) { return lookup(s, kAllLayers); }
std::optional<EntityClass> class_from_string(std::string_view s) {
  return lookup(s, kAllClasses);
}
std::optional<RelationType> relation_from_string(std::string_view s) {
  return lookup(s, kAllRelations);
}
std::optional<GenerationMethod> method_from_string(std::string_view s) {
  constexpr std::array<GenerationMethod, 3> all = {
      GenerationMethod::Auto, GenerationMethod::Semi, GenerationMethod::Manual};
  return lookup(s, all);
}

std::optional<ImportedRelation> import_relation(std::string_view s) {
  if (auto r = relation_from_string(s)) return ImportedRelation{*r, false};
  if (s == "BELONGS_TO_SCHOOL" || s == "PART_OF_DOMAIN") {
    return ImportedRelation{R::CONTAINS, true};
  }
  if (s == "HAS_SEMANTIC_REPRESENTATION") return ImportedRelation{R::HAS_SEMANTIC_REP, false};
  return std::nullopt;
}

Layer home_layer(EntityClass c) {
  switch (c) {
    case C::DOMAIN:
    case C::SCHOOL:
      return Layer::Meta;
    case C::BOOK:
    case C::CHAPTER:
    case C::SECTION:
    case C::PAGE:
    case C::SENTENCE:
      return Layer::Textual;
    case C::HAN_SENTENCE:
    case C::HANVIET_SENTENCE:
    case C::VIETNAMESE_SENTENCE:
    case C::HAN_WORD:
    case C::HANVIET_PRONUNCIATION:
    case C::VIETNAMESE_MEANING:
      return Layer::Linguistic;
    case C::PHILOSOPHICAL_CONCEPT:
      return Layer::Conceptual;
    case C::EXPERT:
    case C::COMMENTARY:
    case C::COMMENTARY_CHUNK:
    case C::SPEAKER:
      return Layer::CommentarySpeaker;
    case C::EMBEDDING:
    case C::SEMANTIC_CLUSTER:
      return Layer::Semantic;
  }
  return Layer::Meta;
}

GenerationMethod generation_method(RelationType r) {
  switch (r) {
    case R::EXPRESSES_CONCEPT:
    case R::RELATED_TO:
    case R::CO_OCCURS_WITH:
    case R::CONTEXTUALIZES:
      return GenerationMethod::Semi;
    case R::PROVIDES_COMMENTARY:
    case R::EXPLAINS:
      return GenerationMethod::Manual;
    default:
      return GenerationMethod::Auto;
  }
}

Ontology::Ontology() {
  auto add = [this](R r, C s, C d) { rules_[index(r)].emplace(s, d); };
  add(R::CONTAINS, C::DOMAIN, C::SCHOOL);
  add(R::CONTAINS, C::SCHOOL, C::BOOK);
  add(R::CONTAINS, C::BOOK, C::CHAPTER);
  add(R::CONTAINS, C::CHAPTER, C::SECTION);
  add(R::CONTAINS, C::SECTION, C::PAGE);
  add(R::CONTAINS, C::PAGE, C::SENTENCE);
  add(R::CONTAINS, C::COMMENTARY, C::COMMENTARY_CHUNK);
  add(R::FOLLOWS, C::SENTENCE, C::SENTENCE);
  add(R::FOLLOWS, C::COMMENTARY_CHUNK, C::COMMENTARY_CHUNK);
  add(R::APPEARS_IN, C::HAN_WORD, C::HAN_SENTENCE);
  add(R::HAS_HAN_FORM, C::SENTENCE, C::HAN_SENTENCE);
  add(R::HAS_HANVIET_FORM, C::SENTENCE, C::HANVIET_SENTENCE);
  add(R::HAS_VIETNAMESE_TRANSLATION, C::SENTENCE, C::VIETNAMESE_SENTENCE);
  add(R::TRANSLATES_TO, C::HAN_WORD, C::VIETNAMESE_MEANING);
  add(R::PRONOUNCED_AS, C::HAN_WORD, C::HANVIET_PRONUNCIATION);
  add(R::EXPRESSES_CONCEPT, C::SENTENCE, C::PHILOSOPHICAL_CONCEPT);
  add(R::EXPRESSES_CONCEPT, C::HAN_SENTENCE, C::PHILOSOPHICAL_CONCEPT);
  add(R::RELATED_TO, C::PHILOSOPHICAL_CONCEPT, C::PHILOSOPHICAL_CONCEPT);
  add(R::CO_OCCURS_WITH, C::PHILOSOPHICAL_CONCEPT, C::PHILOSOPHICAL_CONCEPT);
  add(R::PROVIDES_COMMENTARY, C::EXPERT, C::COMMENTARY);
  add(R::EXPLAINS, C::COMMENTARY, C::SECTION);
  add(R::EXPLAINS, C::COMMENTARY_CHUNK, C::SECTION);
  add(R::CONTEXTUALIZES, C::COMMENTARY_CHUNK, C::SENTENCE);
  add(R::QUOTES, C::SPEAKER, C::HAN_SENTENCE);
  add(R::SIMILAR_TO, C::EMBEDDING, C::EMBEDDING);
  add(R::BELONGS_TO_CLUSTER, C::EMBEDDING, C::SEMANTIC_CLUSTER);
  add(R::HAS_SEMANTIC_REP, C::SENTENCE, C::EMBEDDING);
  add(R::HAS_SEMANTIC_REP, C::COMMENTARY_CHUNK, C::EMBEDDING);
  add(R::HAS_SEMANTIC_REP, C::VIETNAMESE_SENTENCE, C::EMBEDDING);
}

const Ontology& Ontology::standard() {
  static const Ontology instance = [] {
    Ontology o;
    for (R r : kAllRelations) {
      if (o.rules_[index(r)].empty()) std::abort();  // every relation needs a rule
    }
    return o;
  }();
  return instance;
}

bool Ontology::allows(RelationType r, EntityClass src, EntityClass dst) const {
  return rules_[index(r)].contains({src, dst});
}

const std::set<EndpointPair>& Ontology::endpoints(RelationType r) const {
  return rules_[index(r)];
}

void Ontology::extend(RelationType r, EntityClass src, EntityClass dst) {
  rules_[index(r)].emplace(src, dst);
}

std::string Ontology::to_json() const {
  nlohmann::json doc;
  doc["format_version"] = 1;
  auto& layers = doc["layers"] = nlohmann::json::array();
  for (Layer l : kAllLayers) layers.push_back(to_string(l));
  auto& classes = doc["classes"] = nlohmann::json::array();
  for (EntityClass c : kAllClasses) {
    classes.push_back({{"name", to_string(c)}, {"layer", to_string(home_layer(c))}});
  }
  auto& relations = doc["relations"] = nlohmann::json::array();
  for (RelationType r : kAllRelations) {
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& [s, d] : rules_[index(r)]) {
      pairs.push_back({{"source", to_string(s)}, {"target", to_string(d)}});
    }
    relations.push_back(
        {{"name", to_string(r)}, {"method", to_string(generation_method(r))}, {"endpoints", pairs}});
  }
  return doc.dump();
}

bool validate_edge(RelationType r, EntityClass src, EntityClass dst) {
  return Ontology::standard().allows(r, src, dst);
}

bool is_cross_layer(RelationType, EntityClass src, EntityClass dst) {
  return home_layer(src) != home_layer(dst);
}

static_assert(kAllLayers.size() == 6);
static_assert(kAllClasses.size() == 20);
static_assert(kAllRelations.size() == 18);

}  // namespace sishu::ontology
