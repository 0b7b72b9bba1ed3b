#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace binderlsc {

// lemma -> number of dictionary senses (>= 1)
using CandidateLexicon = std::map<std::string, std::size_t, std::less<>>;
// whole-word tokens of the encoder vocabulary
using EncoderVocabulary = std::set<std::string, std::less<>>;

inline constexpr std::size_t kMinSenses = 2;
inline constexpr std::size_t kMinCharacters = 4;

// "lemma<TAB>sense_count" per line. Lemmas are lowercased; a lemma listed
// twice keeps the larger count.
CandidateLexicon parse_candidates(std::string_view text);
CandidateLexicon load_candidates(const std::filesystem::path& path);

// One token per line; blank lines ignored.
EncoderVocabulary parse_vocabulary(std::string_view text);
EncoderVocabulary load_vocabulary(const std::filesystem::path& path);

// Number of Unicode scalar values in a UTF-8 string.
std::size_t utf8_length(std::string_view s);

struct TargetSelection {
  std::vector<std::string> words;  // ascending
  std::size_t rejected_non_alphabetic = 0;
  std::size_t rejected_vocabulary = 0;
  std::size_t rejected_senses = 0;
  std::size_t rejected_length = 0;
};

// Keeps lemmas that are in the vocabulary, have >= 2 senses and are at least
// 4 characters long. Lemmas containing ASCII non-letters (multiword '_',
// digits, hyphens, apostrophes, ...) are dropped first and counted.
TargetSelection select_targets(const CandidateLexicon& candidates, const EncoderVocabulary& vocab);

}  // namespace binderlsc
