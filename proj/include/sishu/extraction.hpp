#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sishu/embedding.hpp"

namespace sishu::extraction {

struct SpeakerPattern {
  std::string marker;
  std::string speaker_name;

  bool operator==(const SpeakerPattern&) const = default;
};

struct SpeakerHit {
  std::string speaker_name;
  std::size_t offset = 0;  // code points

  bool operator==(const SpeakerHit&) const = default;
};

/// 子曰, 孟子曰, 曾子曰, 子貢曰.
std::vector<SpeakerPattern> default_speakers();

/// Reads a JSON list of `{marker, name}`. Throws BadFormat on duplicates.
std::vector<SpeakerPattern> load_speakers(const std::filesystem::path& path);

/// Left-to-right scan; at each offset the longest marker wins (table order
/// breaks length ties) and scanning resumes after it.
std::vector<SpeakerHit> detect_speakers(std::string_view han_text,
                                        std::span<const SpeakerPattern> patterns);

enum class ConceptCategory { Virtue, Cultivation, Foundation, Harmony, Relation, Learning, Social };

std::string_view to_string(ConceptCategory c);
std::optional<ConceptCategory> category_from_string(std::string_view s);

struct ConceptDef {
  std::string character;
  std::string english;
  std::string vietnamese;
  ConceptCategory category = ConceptCategory::Virtue;

  bool operator==(const ConceptDef&) const = default;
};

/// The 23-concept taxonomy that ships in data/concepts.json.
std::vector<ConceptDef> default_taxonomy();

/// Reads a JSON list of `{char, english, vietnamese, category}`.
std::vector<ConceptDef> load_taxonomy(const std::filesystem::path& path);

struct ConceptHit {
  ConceptDef concept_def;
  std::string sentence_id;
  std::size_t position = 0;  // first occurrence, in code points
  int count = 0;

  bool operator==(const ConceptHit&) const = default;
};

/// One hit per concept present, counting every occurrence of its character.
/// Hits are ordered by first position.
std::vector<ConceptHit> extract_concepts(std::string_view han_text,
                                         std::span<const ConceptDef> taxonomy,
                                         std::string_view sentence_id = {});

using ConceptPair = std::pair<std::string, std::string>;

/// Number of sentences in which each unordered pair of distinct concepts
/// appears together. Both orientations are present with equal counts.
std::map<ConceptPair, int> cooccurrence(
    const std::map<std::string, std::set<std::string>>& concepts_by_sentence);

struct SenseScore {
  std::string meaning;
  double score = 0.0;
};

struct SenseResolution {
  std::string chosen;
  double score = 0.0;
  std::size_t index = 0;
  /// Every candidate with its score, in candidate order.
  std::vector<SenseScore> audit;
};

/// Argmax of cosine(candidate, context); the lowest index wins ties.
/// Throws NoCandidates on an empty list.
SenseResolution resolve_sense(std::string_view han_char, std::span<const std::string> candidates,
                              std::string_view context, const embedding::Provider& embedder);

}  // namespace sishu::extraction
