#include <doctest.h>

#include "binderlsc/target_selection.hpp"
#include "support.hpp"

using namespace binderlsc;

TEST_CASE("each condition is exercised") {
  const CandidateLexicon c{{"plane", 5}, {"ox", 3}, {"zyzzyva", 2}};
  const EncoderVocabulary v{"plane", "ox"};
  const auto s = select_targets(c, v);
  CHECK(s.words == std::vector<std::string>{"plane"});
  CHECK(s.rejected_length == 1);
  CHECK(s.rejected_vocabulary == 1);
}

TEST_CASE("single-sense and non-alphabetic lemmas are dropped") {
  const CandidateLexicon c{{"gaiety", 1}, {"ice_cream", 4}, {"co-op", 2}, {"mp3s", 2},
                           {"record", 9}, {"naïve", 2}};
  const EncoderVocabulary v{"gaiety", "ice_cream", "co-op", "mp3s", "record", "naïve"};
  const auto s = select_targets(c, v);
  CHECK(s.words == std::vector<std::string>{"naïve", "record"});
  CHECK(s.rejected_senses == 1);
  CHECK(s.rejected_non_alphabetic == 3);
}

TEST_CASE("length counts code points") {
  CHECK(utf8_length("naïve") == 5);
  CHECK(utf8_length("abc") == 3);
  const CandidateLexicon c{{"élan", 2}, {"ées", 2}};
  const EncoderVocabulary v{"élan", "ées"};
  CHECK(select_targets(c, v).words == std::vector<std::string>{"élan"});
}

TEST_CASE("output is a sorted subset and the filter is idempotent") {
  Rng rng(3);
  CandidateLexicon c;
  EncoderVocabulary v;
  const std::string letters = "abcdefgh";
  for (int i = 0; i < 300; ++i) {
    std::string w;
    const auto len = 2 + rng.below(6);
    for (std::size_t j = 0; j < len; ++j) w += letters[rng.below(letters.size())];
    c[w] = 1 + rng.below(4);
    if (rng.uniform() < 0.6) v.insert(w);
  }
  const auto s = select_targets(c, v);
  CHECK(std::is_sorted(s.words.begin(), s.words.end()));
  CandidateLexicon again;
  for (const auto& w : s.words) {
    CHECK(c.contains(w));
    CHECK(v.contains(w));
    again[w] = c.at(w);
  }
  CHECK(select_targets(again, v).words == s.words);
}

TEST_CASE("candidate and vocabulary parsing") {
  const auto c = parse_candidates("# lemma\tsenses\nPlane\t5\n\nplane\t7\nox\t3\n");
  CHECK(c.at("plane") == 7);
  CHECK(c.size() == 2);
  CHECK_ERROR(parse_candidates("plane\t0\n"), Parse);
  CHECK_ERROR(parse_candidates("plane 5\n"), Parse);
  CHECK_ERROR(parse_candidates("plane\tmany\n"), Parse);
  CHECK(parse_vocabulary("a\n\nb\r\n").size() == 2);
  CHECK_ERROR(parse_vocabulary("\n\n"), Validation);
}
