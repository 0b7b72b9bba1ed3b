#include "binderlsc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "binderlsc/error.hpp"
#include "binderlsc/text.hpp"

namespace binderlsc {

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // positions i..j-1 hold ranks i+1..j
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = rank;
    i = j;
  }
  return ranks;
}

double spearman_rank_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::Shape, "spearman: length mismatch");
  if (a.size() < 2) throw Error(ErrorCode::UndefinedCorrelation, "spearman: need >= 2 values");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  // Mean of 1..n, which average ranks preserve.
  const double mean = (n + 1.0) / 2.0;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    const double da = ra[i] - mean;
    const double db = rb[i] - mean;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) {
    throw Error(ErrorCode::UndefinedCorrelation, "spearman: constant input");
  }
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

ScoreTable parse_score_table(std::string_view content) {
  ScoreTable table;
  const auto rows = text::lines(content);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto line = text::trim(rows[i]);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = text::split(line, '\t');
    const std::string where = "line " + std::to_string(i + 1);
    if (fields.size() != 2) {
      throw Error(ErrorCode::Parse, where + ": expected 'word<TAB>score'");
    }
    const auto score = text::parse_double(fields[1]);
    if (!score || !std::isfinite(*score)) {
      throw Error(ErrorCode::Parse, where + ": bad score '" + std::string(fields[1]) + "'");
    }
    std::string word(text::trim(fields[0]));
    if (word.empty()) throw Error(ErrorCode::Parse, where + ": empty word");
    if (!table.emplace(word, *score).second) {
      throw Error(ErrorCode::DuplicateKey, where + ": duplicate word '" + word + "'");
    }
  }
  return table;
}

ScoreTable load_score_table(const std::filesystem::path& path) {
  return parse_score_table(text::read_file(path));
}

double evaluate(const ScoreTable& gold, const ScoreTable& predicted) {
  if (gold.size() < 2) {
    throw Error(ErrorCode::InsufficientData, "gold needs at least two words");
  }
  std::vector<double> g, p;
  std::string missing;
  for (const auto& [word, score] : gold) {
    const auto it = predicted.find(word);
    if (it == predicted.end()) {
      missing += (missing.empty() ? "" : ", ") + word;
      continue;
    }
    g.push_back(score);
    p.push_back(it->second);
  }
  if (!missing.empty()) throw Error(ErrorCode::Coverage, "no prediction for: " + missing);
  return spearman_rank_correlation(g, p);
}

}  // namespace binderlsc
