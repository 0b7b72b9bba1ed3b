#include "binderlsc/pipeline.hpp"

#include <cmath>

#include "binderlsc/error.hpp"
#include "binderlsc/text.hpp"

namespace binderlsc {

TrainingPairs build_training_pairs(const BinderLexicon& lexicon, const EmbeddingArchive& archive,
                                   const std::set<std::string>& periods) {
  TrainingPairs out;
  std::vector<Eigen::VectorXd> inputs;
  std::vector<const Eigen::VectorXd*> targets;
  for (const auto& [word, entry] : lexicon.entries()) {
    try {
      inputs.push_back(corpus_mean(archive, word, periods));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::MissingWord) throw;
      out.skipped.push_back(word);
      continue;
    }
    targets.push_back(&entry.values);
    out.set.words.push_back(word);
  }
  if (inputs.empty()) {
    throw Error(ErrorCode::InsufficientData, "no lexicon word occurs in the archive");
  }
  const auto n = static_cast<Eigen::Index>(inputs.size());
  out.set.inputs.resize(n, static_cast<Eigen::Index>(archive.dimension()));
  out.set.targets.resize(n, static_cast<Eigen::Index>(kBinderFeatureCount));
  for (Eigen::Index i = 0; i < n; ++i) {
    out.set.inputs.row(i) = inputs[static_cast<std::size_t>(i)].transpose();
    out.set.targets.row(i) = targets[static_cast<std::size_t>(i)]->transpose();
  }
  return out;
}

std::string format_lsc_table(const LscTable& table) {
  std::string out = "word\tfrom\tto";
  for (const auto& n : table.feature_names) out += "\t" + n;
  out += "\n";
  for (const auto& v : table.vectors) {
    if (static_cast<std::size_t>(v.values.size()) != table.feature_names.size()) {
      throw Error(ErrorCode::Shape, "vector for '" + v.word + "' does not match the header");
    }
    out += v.word + "\t" + v.period_from + "\t" + v.period_to;
    for (Eigen::Index i = 0; i < v.values.size(); ++i) out += "\t" + text::format_double(v.values[i]);
    out += "\n";
  }
  return out;
}

LscTable parse_lsc_table(std::string_view content) {
  LscTable table;
  bool have_header = false;
  const auto rows = text::lines(content);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto line = rows[i];
    if (text::trim(line).empty() || line.front() == '#') continue;
    const std::string where = "line " + std::to_string(i + 1);
    const auto fields = text::split(line, '\t');
    if (!have_header) {
      if (fields.size() < 4 || fields[0] != "word" || fields[1] != "from" || fields[2] != "to") {
        throw Error(ErrorCode::Parse, where + ": expected header 'word<TAB>from<TAB>to<TAB>...'");
      }
      for (std::size_t c = 3; c < fields.size(); ++c) table.feature_names.emplace_back(fields[c]);
      have_header = true;
      continue;
    }
    if (fields.size() != table.feature_names.size() + 3) {
      throw Error(ErrorCode::Parse, where + ": expected " +
                                        std::to_string(table.feature_names.size() + 3) +
                                        " fields, got " + std::to_string(fields.size()));
    }
    LscVector v{std::string(fields[0]), std::string(fields[1]), std::string(fields[2]),
                Eigen::VectorXd(static_cast<Eigen::Index>(table.feature_names.size()))};
    for (std::size_t c = 3; c < fields.size(); ++c) {
      const auto x = text::parse_double(fields[c]);
      if (!x || !std::isfinite(*x)) {
        throw Error(ErrorCode::Parse, where + ": bad value '" + std::string(fields[c]) + "'");
      }
      v.values[static_cast<Eigen::Index>(c - 3)] = *x;
    }
    table.vectors.push_back(std::move(v));
  }
  if (!have_header) throw Error(ErrorCode::Parse, "LSC table has no header row");
  return table;
}

Eigen::MatrixXd stack_values(const std::vector<LscVector>& vectors) {
  if (vectors.empty()) return {};
  Eigen::MatrixXd m(static_cast<Eigen::Index>(vectors.size()), vectors.front().values.size());
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].values.size() != m.cols()) {
      throw Error(ErrorCode::Shape, "LSC vectors differ in length");
    }
    m.row(static_cast<Eigen::Index>(i)) = vectors[i].values.transpose();
  }
  return m;
}

}  // namespace binderlsc
