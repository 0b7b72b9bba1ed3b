#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace binderlsc {

inline constexpr std::size_t kBinderFeatureCount = 65;
inline constexpr double kBinderMin = 0.0;
inline constexpr double kBinderMax = 6.0;

// Ordered names of the 65 Binder feature axes. Every 65-d vector in the
// toolkit is laid out in this order.
class FeatureIndex {
 public:
  FeatureIndex() = default;
  // Throws Error(Config) unless there are exactly 65 unique non-empty names.
  explicit FeatureIndex(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  const std::string& name_at(std::size_t i) const { return names_.at(i); }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<std::size_t> find(std::string_view name) const;
  // Like find(), but throws Error(Config) for unknown names.
  std::size_t lookup(std::string_view name) const;

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> positions_;
};

struct LexiconEntry {
  Eigen::VectorXd values;  // 65 intensities in [0, 6]
  std::string pos;         // empty when the file has no part-of-speech column
};

// Human-rated Binder vectors keyed by normalized (lowercase, trimmed) word.
// Immutable after load.
class BinderLexicon {
 public:
  BinderLexicon(FeatureIndex features, bool has_pos);

  // Throws Error(DuplicateKey) if the word is already present and
  // Error(Validation) if the vector violates the [0,6] / 65-d invariants.
  void add(std::string_view word, Eigen::VectorXd values, std::string pos = {});

  const FeatureIndex& features() const { return features_; }
  bool has_pos() const { return has_pos_; }
  std::size_t size() const { return entries_.size(); }
  bool contains(std::string_view word) const;
  const LexiconEntry& at(std::string_view word) const;
  const std::map<std::string, LexiconEntry, std::less<>>& entries() const { return entries_; }

  // Counts per part-of-speech tag; empty when there is no pos column.
  std::map<std::string, std::size_t> pos_counts() const;

 private:
  FeatureIndex features_;
  bool has_pos_;
  std::map<std::string, LexiconEntry, std::less<>> entries_;
};

// Indices of the features carrying positive and negative valence.
struct ValenceFeatureSets {
  std::vector<std::size_t> positive;
  std::vector<std::size_t> negative;
};

inline const std::vector<std::string>& positive_valence_names() {
  static const std::vector<std::string> names{"Pleasant", "Happy"};
  return names;
}

inline const std::vector<std::string>& negative_valence_names() {
  static const std::vector<std::string> names{
      "Pain", "Harm", "Unpleasant", "Sad", "Angry", "Disgusted", "Fearful"};
  return names;
}

// The 65 feature names of the published Binder dataset, in its column order.
const std::vector<std::string>& canonical_feature_names();

// Lowercases ASCII letters and trims surrounding whitespace.
std::string normalize_word(std::string_view word);

// Comma-delimited text with a mandatory header "word[,pos],<65 names>".
// Malformed rows raise Error(Parse) naming the 1-based line number.
BinderLexicon parse_lexicon(std::string_view text);
BinderLexicon load_lexicon(const std::filesystem::path& path);

std::string serialize_lexicon(const BinderLexicon& lexicon);
void save_lexicon(const BinderLexicon& lexicon, const std::filesystem::path& path);

// Throws Error(Config) listing every valence feature missing from the index.
ValenceFeatureSets valence_sets(const FeatureIndex& features);
inline ValenceFeatureSets valence_sets(const BinderLexicon& lexicon) {
  return valence_sets(lexicon.features());
}

}  // namespace binderlsc
