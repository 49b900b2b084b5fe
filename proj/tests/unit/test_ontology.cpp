#include <doctest.h>

#include <json.hpp>
#include <regex>
#include <set>
#include <tuple>

#include "sishu/ontology.hpp"

using namespace sishu::ontology;
using C = EntityClass;
using R = RelationType;

namespace {

// Endpoint rules written out as prose so the oracle does not share a table
// with the implementation.
constexpr const char* kRuleText =
    "CONTAINS: (DOMAIN>SCHOOL), (SCHOOL>BOOK), (BOOK>CHAPTER), (CHAPTER>SECTION), "
    "(SECTION>PAGE), (PAGE>SENTENCE), (COMMENTARY>COMMENTARY_CHUNK). "
    "FOLLOWS: (SENTENCE>SENTENCE), (COMMENTARY_CHUNK>COMMENTARY_CHUNK). "
    "APPEARS_IN: (HAN_WORD>HAN_SENTENCE). HAS_HAN_FORM: (SENTENCE>HAN_SENTENCE). "
    "HAS_HANVIET_FORM: (SENTENCE>HANVIET_SENTENCE). "
    "HAS_VIETNAMESE_TRANSLATION: (SENTENCE>VIETNAMESE_SENTENCE). "
    "TRANSLATES_TO: (HAN_WORD>VIETNAMESE_MEANING). PRONOUNCED_AS: (HAN_WORD>HANVIET_PRONUNCIATION). "
    "EXPRESSES_CONCEPT: (SENTENCE>PHILOSOPHICAL_CONCEPT), (HAN_SENTENCE>PHILOSOPHICAL_CONCEPT). "
    "RELATED_TO: (PHILOSOPHICAL_CONCEPT>PHILOSOPHICAL_CONCEPT). "
    "CO_OCCURS_WITH: (PHILOSOPHICAL_CONCEPT>PHILOSOPHICAL_CONCEPT). "
    "PROVIDES_COMMENTARY: (EXPERT>COMMENTARY). "
    "EXPLAINS: (COMMENTARY>SECTION), (COMMENTARY_CHUNK>SECTION). "
    "CONTEXTUALIZES: (COMMENTARY_CHUNK>SENTENCE). QUOTES: (SPEAKER>HAN_SENTENCE). "
    "SIMILAR_TO: (EMBEDDING>EMBEDDING). BELONGS_TO_CLUSTER: (EMBEDDING>SEMANTIC_CLUSTER). "
    "HAS_SEMANTIC_REP: (SENTENCE>EMBEDDING), (COMMENTARY_CHUNK>EMBEDDING), "
    "(VIETNAMESE_SENTENCE>EMBEDDING).";

std::set<std::tuple<std::string, std::string, std::string>> parse_rules() {
  std::set<std::tuple<std::string, std::string, std::string>> out;
  const std::string text = kRuleText;
  const std::regex rel_re(R"(([A-Z_]+): ((?:\([A-Z_]+>[A-Z_]+\)(?:, )?)+))");
  const std::regex pair_re(R"(\(([A-Z_]+)>([A-Z_]+)\))");
  for (std::sregex_iterator it(text.begin(), text.end(), rel_re), end; it != end; ++it) {
    const std::string pairs = (*it)[2];
    for (std::sregex_iterator p(pairs.begin(), pairs.end(), pair_re); p != end; ++p) {
      out.emplace((*it)[1], (*p)[1], (*p)[2]);
    }
  }
  return out;
}

}  // namespace

TEST_SUITE("ontology") {
  TEST_CASE("counts") {
    CHECK(kAllClasses.size() == 20);
    CHECK(kAllRelations.size() == 18);
    CHECK(kAllLayers.size() == 6);
    const auto doc = nlohmann::json::parse(Ontology::standard().to_json());
    CHECK(doc["classes"].size() == 20);
    CHECK(doc["relations"].size() == 18);
    CHECK(doc["layers"].size() == 6);
  }

  TEST_CASE("validate_edge examples") {
    CHECK(validate_edge(R::APPEARS_IN, C::HAN_WORD, C::HAN_SENTENCE));
    CHECK_FALSE(validate_edge(R::CONTAINS, C::SENTENCE, C::BOOK));
    CHECK(validate_edge(R::QUOTES, C::SPEAKER, C::HAN_SENTENCE));
  }

  TEST_CASE("validate_edge agrees with the written rule table on every triple") {
    const auto rules = parse_rules();
    CHECK(rules.size() == 29);
    for (R r : kAllRelations) {
      for (C s : kAllClasses) {
        for (C d : kAllClasses) {
          const bool expected = rules.contains(
              {std::string(to_string(r)), std::string(to_string(s)), std::string(to_string(d))});
          CHECK_MESSAGE(validate_edge(r, s, d) == expected, to_string(r), " ", to_string(s), " ",
                        to_string(d));
        }
      }
    }
  }

  TEST_CASE("cross-layer examples") {
    CHECK(is_cross_layer(R::EXPRESSES_CONCEPT, C::SENTENCE, C::PHILOSOPHICAL_CONCEPT));
    CHECK_FALSE(is_cross_layer(R::CONTAINS, C::BOOK, C::CHAPTER));
    CHECK(is_cross_layer(R::HAS_SEMANTIC_REP, C::COMMENTARY_CHUNK, C::EMBEDDING));
  }

  TEST_CASE("generation methods") {
    CHECK(generation_method(R::CONTAINS) == GenerationMethod::Auto);
    CHECK(generation_method(R::CONTEXTUALIZES) == GenerationMethod::Semi);
    CHECK(generation_method(R::PROVIDES_COMMENTARY) == GenerationMethod::Manual);
    CHECK(generation_method(R::SIMILAR_TO) == GenerationMethod::Auto);
  }

  TEST_CASE("names round trip") {
    for (C c : kAllClasses) CHECK(class_from_string(to_string(c)) == c);
    for (R r : kAllRelations) CHECK(relation_from_string(to_string(r)) == r);
    for (Layer l : kAllLayers) CHECK(layer_from_string(to_string(l)) == l);
    CHECK_FALSE(class_from_string("NOPE").has_value());
  }

  TEST_CASE("import aliases normalize to reversed CONTAINS") {
    const auto a = import_relation("BELONGS_TO_SCHOOL");
    REQUIRE(a.has_value());
    CHECK(a->relation == R::CONTAINS);
    CHECK(a->reversed);
    CHECK(import_relation("PART_OF_DOMAIN")->reversed);
    CHECK_FALSE(import_relation("QUOTES")->reversed);
    CHECK_FALSE(import_relation("UNKNOWN").has_value());
  }

  TEST_CASE("a copy can be extended without touching the standard schema") {
    Ontology copy = Ontology::standard();
    copy.extend(R::QUOTES, C::SPEAKER, C::SENTENCE);
    CHECK(copy.allows(R::QUOTES, C::SPEAKER, C::SENTENCE));
    CHECK_FALSE(validate_edge(R::QUOTES, C::SPEAKER, C::SENTENCE));
  }

  TEST_CASE("every class has a home layer and each layer has a class") {
    std::set<Layer> seen;
    for (C c : kAllClasses) seen.insert(home_layer(c));
    CHECK(seen.size() == 6);
    CHECK(home_layer(C::EXPERT) == Layer::CommentarySpeaker);
    CHECK(home_layer(C::EMBEDDING) == Layer::Semantic);
  }
}
