#include "sishu/extraction.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "sishu/error.hpp"
#include "sishu/text.hpp"

namespace sishu::extraction {

namespace {

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadFormat, path.string() + ": " + e.what());
  }
}

std::string field(const nlohmann::json& row, const char* name, const std::string& where) {
  if (!row.contains(name) || !row[name].is_string()) {
    throw Error(ErrorCode::MissingField, where + ": missing " + name);
  }
  return text::nfc(text::trim(row[name].get<std::string>()));
}

}  // namespace

std::vector<SpeakerPattern> default_speakers() {
  return {{"子曰", "Confucius"}, {"孟子曰", "Mencius"}, {"曾子曰", "Zengzi"}, {"子貢曰", "Zigong"}};
}

std::vector<SpeakerPattern> load_speakers(const std::filesystem::path& path) {
  const auto doc = read_json_file(path);
  if (!doc.is_array()) throw Error(ErrorCode::BadFormat, path.string() + ": expected a list");
  std::vector<SpeakerPattern> out;
  std::set<std::string> seen;
  for (const auto& row : doc) {
    SpeakerPattern p{field(row, "marker", path.string()), field(row, "name", path.string())};
    if (p.marker.empty()) throw Error(ErrorCode::BadFormat, path.string() + ": empty marker");
    if (!seen.insert(p.marker).second) {
      throw Error(ErrorCode::BadFormat, path.string() + ": duplicate marker " + p.marker);
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<SpeakerHit> detect_speakers(std::string_view han_text,
                                        std::span<const SpeakerPattern> patterns) {
  struct Marker {
    std::u32string cps;
    const SpeakerPattern* pattern;
  };
  std::vector<Marker> markers;
  for (const auto& p : patterns) {
    if (!p.marker.empty()) markers.push_back({text::to_u32(p.marker), &p});
  }
  std::stable_sort(markers.begin(), markers.end(), [](const Marker& a, const Marker& b) {
    return a.cps.size() > b.cps.size();
  });

  const std::u32string hay = text::to_u32(han_text);
  std::vector<SpeakerHit> hits;
  std::size_t i = 0;
  while (i < hay.size()) {
    const Marker* match = nullptr;
    for (const auto& m : markers) {
      if (hay.compare(i, m.cps.size(), m.cps) == 0) {
        match = &m;
        break;
      }
    }
    if (match == nullptr) {
      ++i;
      continue;
    }
    hits.push_back({match->pattern->speaker_name, i});
    i += match->cps.size();
  }
  return hits;
}

std::string_view to_string(ConceptCategory c) {
  switch (c) {
    case ConceptCategory::Virtue: return "Virtue";
    case ConceptCategory::Cultivation: return "Cultivation";
    case ConceptCategory::Foundation: return "Foundation";
    case ConceptCategory::Harmony: return "Harmony";
    case ConceptCategory::Relation: return "Relation";
    case ConceptCategory::Learning: return "Learning";
    case ConceptCategory::Social: return "Social";
  }
  return "?";
}

std::optional<ConceptCategory> category_from_string(std::string_view s) {
  for (auto c : {ConceptCategory::Virtue, ConceptCategory::Cultivation,
                 ConceptCategory::Foundation, ConceptCategory::Harmony, ConceptCategory::Relation,
                 ConceptCategory::Learning, ConceptCategory::Social}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

std::vector<ConceptDef> default_taxonomy() {
  using C = ConceptCategory;
  return {
      {"仁", "Benevolence", "Nhân", C::Virtue},
      {"義", "Righteousness", "Nghĩa", C::Virtue},
      {"禮", "Ritual propriety", "Lễ", C::Virtue},
      {"智", "Wisdom", "Trí", C::Virtue},
      {"信", "Trustworthiness", "Tín", C::Virtue},
      {"德", "Virtue/Power", "Đức", C::Cultivation},
      {"誠", "Sincerity", "Chân", C::Cultivation},
      {"正", "Correctness", "Chính", C::Cultivation},
      {"道", "The Way", "Đạo", C::Foundation},
      {"天", "Heaven", "Thiên", C::Foundation},
      {"中", "The Mean", "Trung", C::Harmony},
      {"和", "Harmony", "Hòa", C::Harmony},
      {"孝", "Filial piety", "Hiếu", C::Relation},
      {"悌", "Fraternal respect", "Đệ", C::Relation},
      {"忠", "Loyalty", "Trung", C::Relation},
      {"恕", "Forgiveness/Reciprocity", "Thứ", C::Relation},
      {"學", "Learning", "Học", C::Learning},
      {"教", "Teaching", "Giáo dục", C::Learning},
      {"知", "Knowledge", "Tri", C::Learning},
      {"君", "Ruler", "Quân", C::Social},
      {"臣", "Minister", "Thần", C::Social},
      {"民", "People", "Dân", C::Social},
      {"政", "Government", "Chính", C::Social},
  };
}

std::vector<ConceptDef> load_taxonomy(const std::filesystem::path& path) {
  const auto doc = read_json_file(path);
  if (!doc.is_array()) throw Error(ErrorCode::BadFormat, path.string() + ": expected a list");
  std::vector<ConceptDef> out;
  std::set<std::string> seen;
  for (const auto& row : doc) {
    ConceptDef def;
    def.character = field(row, "char", path.string());
    def.english = field(row, "english", path.string());
    def.vietnamese = field(row, "vietnamese", path.string());
    const auto cat = category_from_string(field(row, "category", path.string()));
    if (!cat) throw Error(ErrorCode::BadFormat, path.string() + ": unknown category");
    def.category = *cat;
    if (def.character.empty()) throw Error(ErrorCode::EmptyCharacter, path.string());
    if (!seen.insert(def.character).second) {
      throw Error(ErrorCode::DuplicateId, path.string() + ": duplicate concept " + def.character);
    }
    out.push_back(std::move(def));
  }
  return out;
}

std::vector<ConceptHit> extract_concepts(std::string_view han_text,
                                         std::span<const ConceptDef> taxonomy,
                                         std::string_view sentence_id) {
  const std::u32string hay = text::to_u32(han_text);
  std::vector<ConceptHit> hits;
  for (const auto& def : taxonomy) {
    const std::u32string needle = text::to_u32(def.character);
    if (needle.empty()) continue;
    ConceptHit hit{def, std::string(sentence_id), 0, 0};
    for (std::size_t pos = hay.find(needle); pos != std::u32string::npos;
         pos = hay.find(needle, pos + needle.size())) {
      if (hit.count == 0) hit.position = pos;
      ++hit.count;
    }
    if (hit.count > 0) hits.push_back(std::move(hit));
  }
  std::stable_sort(hits.begin(), hits.end(), [](const ConceptHit& a, const ConceptHit& b) {
    return a.position < b.position;
  });
  return hits;
}

std::map<ConceptPair, int> cooccurrence(
    const std::map<std::string, std::set<std::string>>& concepts_by_sentence) {
  std::map<ConceptPair, int> out;
  for (const auto& [sentence, concepts] : concepts_by_sentence) {
    for (auto a = concepts.begin(); a != concepts.end(); ++a) {
      for (auto b = std::next(a); b != concepts.end(); ++b) {
        ++out[{*a, *b}];
        ++out[{*b, *a}];
      }
    }
  }
  return out;
}

SenseResolution resolve_sense(std::string_view han_char, std::span<const std::string> candidates,
                              std::string_view context, const embedding::Provider& embedder) {
  if (candidates.empty()) {
    throw Error(ErrorCode::NoCandidates, "no meanings for " + std::string(han_char));
  }
  const auto ctx = embedder.embed(context, embedding::Mode::Passage);
  SenseResolution out;
  out.score = -2.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double s = embedding::cosine(embedder.embed(candidates[i], embedding::Mode::Passage), ctx);
    out.audit.push_back({candidates[i], s});
    if (s > out.score) {
      out.score = s;
      out.index = i;
      out.chosen = candidates[i];
    }
  }
  return out;
}

}  // namespace sishu::extraction
