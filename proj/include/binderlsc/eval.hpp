#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace binderlsc {

// 1-based ranks; tied values share the average of the ranks they span.
std::vector<double> average_ranks(std::span<const double> values);

// Pearson correlation of the average ranks. Requires equal lengths >= 2;
// throws Error(UndefinedCorrelation) when either side is constant.
double spearman_rank_correlation(std::span<const double> a, std::span<const double> b);

// word -> graded change score
using ScoreTable = std::map<std::string, double, std::less<>>;

// "word<TAB>score" per line; lines starting with '#' and blank lines are
// skipped. Throws Error(Parse) naming the line, Error(DuplicateKey) on repeats.
ScoreTable parse_score_table(std::string_view text);
ScoreTable load_score_table(const std::filesystem::path& path);

// Spearman correlation over the gold words in sorted order. Throws
// Error(Coverage) listing gold words missing from the predictions and
// Error(InsufficientData) when gold has fewer than two words.
double evaluate(const ScoreTable& gold, const ScoreTable& predicted);

}  // namespace binderlsc
