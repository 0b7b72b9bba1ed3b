#pragma once

// Glue between modules: training pairs from a lexicon and an archive, and
// the delimited LSC-vector table the CLI passes between subcommands.

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "binderlsc/embedding_store.hpp"
#include "binderlsc/lexicon.hpp"
#include "binderlsc/lsc_metrics.hpp"
#include "binderlsc/regressor.hpp"

namespace binderlsc {

struct TrainingPairs {
  TrainingSet set;
  std::vector<std::string> skipped;  // lexicon words absent from the archive
};

// One pair per lexicon word with at least one occurrence: (corpus mean over
// the selected periods, Binder vector). Rows follow lexicon word order.
// Throws Error(Shape) if the lexicon is not 65-d-compatible with the archive
// and Error(InsufficientData) when no word is covered.
TrainingPairs build_training_pairs(const BinderLexicon& lexicon, const EmbeddingArchive& archive,
                                   const std::set<std::string>& periods = {});

struct LscTable {
  std::vector<std::string> feature_names;
  std::vector<LscVector> vectors;
};

// Tab-delimited: '#' comment lines, a header "word from to <names...>",
// one row per vector with shortest round-trip decimals.
std::string format_lsc_table(const LscTable& table);
// Throws Error(Parse) naming the line.
LscTable parse_lsc_table(std::string_view text);

// Values stacked into an m x p matrix, one row per vector.
Eigen::MatrixXd stack_values(const std::vector<LscVector>& vectors);

}  // namespace binderlsc
