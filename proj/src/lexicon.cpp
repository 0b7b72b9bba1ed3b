#include "binderlsc/lexicon.hpp"

#include <cctype>
#include <unordered_set>

#include "binderlsc/error.hpp"
#include "binderlsc/text.hpp"

namespace binderlsc {

FeatureIndex::FeatureIndex(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.size() != kBinderFeatureCount) {
    throw Error(ErrorCode::Config, "feature index needs " + std::to_string(kBinderFeatureCount) +
                                       " names, got " + std::to_string(names_.size()));
  }
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i].empty()) {
      throw Error(ErrorCode::Config, "empty feature name at column " + std::to_string(i));
    }
    if (!positions_.emplace(names_[i], i).second) {
      throw Error(ErrorCode::Config, "duplicate feature name '" + names_[i] + "'");
    }
  }
}

std::optional<std::size_t> FeatureIndex::find(std::string_view name) const {
  const auto it = positions_.find(std::string(name));
  if (it == positions_.end()) return std::nullopt;
  return it->second;
}

std::size_t FeatureIndex::lookup(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw Error(ErrorCode::Config, "unknown feature '" + std::string(name) + "'");
}

BinderLexicon::BinderLexicon(FeatureIndex features, bool has_pos)
    : features_(std::move(features)), has_pos_(has_pos) {}

void BinderLexicon::add(std::string_view word, Eigen::VectorXd values, std::string pos) {
  std::string key = normalize_word(word);
  if (key.empty()) throw Error(ErrorCode::Validation, "empty lexicon word");
  if (static_cast<std::size_t>(values.size()) != kBinderFeatureCount) {
    throw Error(ErrorCode::Validation, "vector for '" + key + "' has length " +
                                           std::to_string(values.size()));
  }
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (!(values[i] >= kBinderMin && values[i] <= kBinderMax)) {
      throw Error(ErrorCode::Validation, "value for '" + key + "' feature " +
                                             features_.name_at(static_cast<std::size_t>(i)) +
                                             " outside [0,6]");
    }
  }
  if (entries_.contains(key)) {
    throw Error(ErrorCode::DuplicateKey, "duplicate lexicon word '" + key + "'");
  }
  entries_.emplace(std::move(key), LexiconEntry{std::move(values), std::move(pos)});
}

bool BinderLexicon::contains(std::string_view word) const {
  return entries_.find(word) != entries_.end();
}

const LexiconEntry& BinderLexicon::at(std::string_view word) const {
  const auto it = entries_.find(word);
  if (it == entries_.end()) {
    throw Error(ErrorCode::MissingWord, "word '" + std::string(word) + "' not in lexicon");
  }
  return it->second;
}

std::map<std::string, std::size_t> BinderLexicon::pos_counts() const {
  std::map<std::string, std::size_t> counts;
  if (!has_pos_) return counts;
  for (const auto& [word, entry] : entries_) ++counts[entry.pos];
  return counts;
}

const std::vector<std::string>& canonical_feature_names() {
  static const std::vector<std::string> names{
      "Vision",      "Bright",        "Dark",       "Color",         "Pattern",   "Large",
      "Small",       "Motion",        "Biomotion",  "Fast",          "Slow",      "Shape",
      "Complexity",  "Face",          "Body",       "Touch",         "Temperature", "Texture",
      "Weight",      "Pain",          "Audition",   "Loud",          "Low",       "High",
      "Sound",       "Music",         "Speech",     "Taste",         "Smell",     "Head",
      "UpperLimb",   "LowerLimb",     "Practice",   "Landmark",      "Path",      "Scene",
      "Near",        "Toward",        "Away",       "Number",        "Time",      "Duration",
      "Long",        "Short",         "Caused",     "Consequential", "Social",    "Human",
      "Communication", "Self",        "Cognition",  "Benefit",       "Harm",      "Pleasant",
      "Unpleasant",  "Happy",         "Sad",        "Angry",         "Disgusted", "Fearful",
      "Surprised",   "Drive",         "Needs",      "Attention",     "Arousal"};
  return names;
}

std::string normalize_word(std::string_view word) {
  std::string out(text::trim(word));
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

BinderLexicon parse_lexicon(std::string_view content) {
  const auto rows = text::lines(content);
  std::size_t header_line = 0;
  while (header_line < rows.size() && text::trim(rows[header_line]).empty()) ++header_line;
  if (header_line == rows.size()) throw Error(ErrorCode::Parse, "lexicon: missing header row");

  const auto header = text::split(rows[header_line], ',');
  if (header.empty() || normalize_word(header[0]) != "word") {
    throw Error(ErrorCode::Parse, "lexicon line " + std::to_string(header_line + 1) +
                                      ": header must start with 'word'");
  }
  const bool has_pos = header.size() > 1 && normalize_word(header[1]) == "pos";
  const std::size_t first_feature = has_pos ? 2 : 1;
  std::vector<std::string> names;
  for (std::size_t c = first_feature; c < header.size(); ++c) {
    names.emplace_back(text::trim(header[c]));
  }
  BinderLexicon lexicon(FeatureIndex(std::move(names)), has_pos);

  const std::size_t columns = header.size();
  for (std::size_t i = header_line + 1; i < rows.size(); ++i) {
    const std::string where = "lexicon line " + std::to_string(i + 1);
    if (text::trim(rows[i]).empty()) continue;
    const auto fields = text::split(rows[i], ',');
    if (fields.size() != columns) {
      throw Error(ErrorCode::Parse, where + ": expected " + std::to_string(columns) +
                                        " columns, got " + std::to_string(fields.size()));
    }
    Eigen::VectorXd values(static_cast<Eigen::Index>(kBinderFeatureCount));
    for (std::size_t c = first_feature; c < columns; ++c) {
      const auto v = text::parse_double(fields[c]);
      if (!v) {
        throw Error(ErrorCode::Parse,
                    where + ": non-numeric value '" + std::string(fields[c]) + "'");
      }
      if (!(*v >= kBinderMin && *v <= kBinderMax)) {
        throw Error(ErrorCode::Parse,
                    where + ": value " + std::string(text::trim(fields[c])) + " outside [0,6]");
      }
      values[static_cast<Eigen::Index>(c - first_feature)] = *v;
    }
    const std::string word = normalize_word(fields[0]);
    if (word.empty()) throw Error(ErrorCode::Parse, where + ": empty word");
    if (lexicon.contains(word)) {
      throw Error(ErrorCode::DuplicateKey, where + ": duplicate word '" + word + "'");
    }
    lexicon.add(word, std::move(values),
                has_pos ? std::string(text::trim(fields[1])) : std::string());
  }
  return lexicon;
}

BinderLexicon load_lexicon(const std::filesystem::path& path) {
  return parse_lexicon(text::read_file(path));
}

std::string serialize_lexicon(const BinderLexicon& lexicon) {
  std::string out = "word";
  if (lexicon.has_pos()) out += ",pos";
  for (const auto& name : lexicon.features().names()) {
    out += ',';
    out += name;
  }
  out += '\n';
  for (const auto& [word, entry] : lexicon.entries()) {
    out += word;
    if (lexicon.has_pos()) {
      out += ',';
      out += entry.pos;
    }
    for (Eigen::Index i = 0; i < entry.values.size(); ++i) {
      out += ',';
      out += text::format_double(entry.values[i]);
    }
    out += '\n';
  }
  return out;
}

void save_lexicon(const BinderLexicon& lexicon, const std::filesystem::path& path) {
  text::write_file(path, serialize_lexicon(lexicon));
}

ValenceFeatureSets valence_sets(const FeatureIndex& features) {
  ValenceFeatureSets sets;
  std::string missing;
  auto collect = [&](const std::vector<std::string>& names, std::vector<std::size_t>& into) {
    for (const auto& name : names) {
      if (auto i = features.find(name)) {
        into.push_back(*i);
      } else {
        if (!missing.empty()) missing += ", ";
        missing += name;
      }
    }
  };
  collect(positive_valence_names(), sets.positive);
  collect(negative_valence_names(), sets.negative);
  if (!missing.empty()) {
    throw Error(ErrorCode::Config, "feature index is missing valence features: " + missing);
  }
  return sets;
}

}  // namespace binderlsc
