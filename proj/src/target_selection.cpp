#include "binderlsc/target_selection.hpp"

#include <algorithm>

#include "binderlsc/error.hpp"
#include "binderlsc/lexicon.hpp"
#include "binderlsc/text.hpp"

namespace binderlsc {

CandidateLexicon parse_candidates(std::string_view content) {
  CandidateLexicon out;
  const auto rows = text::lines(content);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto line = text::trim(rows[i]);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = text::split(line, '\t');
    const std::string where = "line " + std::to_string(i + 1);
    if (fields.size() != 2) throw Error(ErrorCode::Parse, where + ": expected 'lemma<TAB>senses'");
    const auto senses = text::parse_int(fields[1]);
    if (!senses || *senses < 1) {
      throw Error(ErrorCode::Parse, where + ": sense count must be a positive integer");
    }
    const std::string lemma = normalize_word(fields[0]);
    if (lemma.empty()) throw Error(ErrorCode::Parse, where + ": empty lemma");
    auto& slot = out[lemma];
    slot = std::max(slot, static_cast<std::size_t>(*senses));
  }
  return out;
}

CandidateLexicon load_candidates(const std::filesystem::path& path) {
  return parse_candidates(text::read_file(path));
}

EncoderVocabulary parse_vocabulary(std::string_view content) {
  EncoderVocabulary vocab;
  for (auto line : text::lines(content)) {
    const auto token = text::trim(line);
    if (!token.empty()) vocab.emplace(token);
  }
  if (vocab.empty()) throw Error(ErrorCode::Validation, "encoder vocabulary is empty");
  return vocab;
}

EncoderVocabulary load_vocabulary(const std::filesystem::path& path) {
  return parse_vocabulary(text::read_file(path));
}

std::size_t utf8_length(std::string_view s) {
  // Count every byte that is not a continuation byte (10xxxxxx).
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) {
    return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
  }));
}

namespace {

bool alphabetic(std::string_view word) {
  return std::all_of(word.begin(), word.end(), [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return u >= 0x80 || (u >= 'a' && u <= 'z') || (u >= 'A' && u <= 'Z');
  });
}

}  // namespace

TargetSelection select_targets(const CandidateLexicon& candidates, const EncoderVocabulary& vocab) {
  TargetSelection result;
  for (const auto& [lemma, senses] : candidates) {
    if (!alphabetic(lemma)) {
      ++result.rejected_non_alphabetic;
    } else if (!vocab.contains(lemma)) {
      ++result.rejected_vocabulary;
    } else if (senses < kMinSenses) {
      ++result.rejected_senses;
    } else if (utf8_length(lemma) < kMinCharacters) {
      ++result.rejected_length;
    } else {
      result.words.push_back(lemma);
    }
  }
  // CandidateLexicon is ordered, so words are already ascending.
  return result;
}

}  // namespace binderlsc
