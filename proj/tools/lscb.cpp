// lscb: command-line front end for the binderlsc toolkit.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "binderlsc/clustering.hpp"
#include "binderlsc/embedding_store.hpp"
#include "binderlsc/error.hpp"
#include "binderlsc/eval.hpp"
#include "binderlsc/lexicon.hpp"
#include "binderlsc/lsc_metrics.hpp"
#include "binderlsc/pipeline.hpp"
#include "binderlsc/regressor.hpp"
#include "binderlsc/rng.hpp"
#include "binderlsc/sparse_pca.hpp"
#include "binderlsc/target_selection.hpp"
#include "binderlsc/text.hpp"

#ifndef BINDERLSC_VERSION
#define BINDERLSC_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace binderlsc;

namespace {

constexpr std::uint64_t kDefaultSeed = 20240601;

// "# key: value" header written at the top of every text output.
class Metadata {
 public:
  Metadata(std::string command, std::uint64_t seed) : command_(std::move(command)), seed_(seed) {}

  void add(const std::string& key, const std::string& value) { entries_.emplace_back(key, value); }
  void add(const std::string& key, double value) { add(key, text::format_double(value)); }
  void add_count(const std::string& key, std::size_t value) { add(key, std::to_string(value)); }

  std::string block() const {
    std::string out = "# lscb " BINDERLSC_VERSION "\n";
    out += "# command: " + command_ + "\n";
    out += "# seed: " + std::to_string(seed_) + "\n";
    for (const auto& [k, v] : entries_) out += "# " + k + ": " + v + "\n";
    return out;
  }

 private:
  std::string command_;
  std::uint64_t seed_;
  std::vector<std::pair<std::string, std::string>> entries_;
};

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    std::cout.flush();
  } else {
    text::write_file(path, content);
  }
}

void warn(const std::string& message) { std::cerr << "warning: " << message << "\n"; }

std::string join(const std::vector<std::string>& items, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::string describe_set(const std::set<std::string>& s) { return s.empty() ? "all" : join({s.begin(), s.end()}, ","); }

ArchiveFormat archive_format(const std::string& path, const std::string& override_name) {
  if (override_name == "jsonl") return ArchiveFormat::Lines;
  if (override_name == "packed") return ArchiveFormat::Packed;
  return format_from_extension(path);
}

EmbeddingArchive load_archive(const std::string& path, const std::string& override_name) {
  return read_archive(path, archive_format(path, override_name));
}

std::set<std::string> period_selection(const std::optional<std::string>& period) {
  if (!period || period->empty()) return {};
  return {*period};
}

// Words present in both selections, or the requested list (missing ones are
// warned about and skipped).
std::vector<std::string> shared_words(const EmbeddingArchive& a, const std::set<std::string>& pa,
                                      const EmbeddingArchive& b, const std::set<std::string>& pb,
                                      const std::string& words_file) {
  auto occurs = [](const EmbeddingArchive& ar, const std::string& w, const std::set<std::string>& ps) {
    if (ps.empty()) {
      for (const auto& p : ar.periods()) {
        if (ar.has(w, p)) return true;
      }
      return false;
    }
    return std::any_of(ps.begin(), ps.end(), [&](const std::string& p) { return ar.has(w, p); });
  };
  std::vector<std::string> candidates;
  if (!words_file.empty()) {
    std::set<std::string> unique;
    const std::string content = text::read_file(words_file);
    for (auto line : text::lines(content)) {
      const auto w = text::trim(line);
      if (!w.empty() && w.front() != '#') unique.emplace(w);
    }
    candidates.assign(unique.begin(), unique.end());
  } else {
    candidates = a.words();
  }
  std::vector<std::string> out;
  for (const auto& w : candidates) {
    if (occurs(a, w, pa) && occurs(b, w, pb)) {
      out.push_back(w);
    } else if (!words_file.empty()) {
      warn("skipping '" + w + "': no occurrences in one of the selections");
    }
  }
  return out;
}

struct CommonTrain {
  std::string lexicon;
  std::string archive;
  std::string format;
  std::vector<std::string> periods;
  std::string model = "lt";
  std::size_t epochs = 100;
  std::size_t batch_size = 16;
  double learning_rate = 1e-3;

  void attach(CLI::App* cmd) {
    cmd->add_option("--lexicon", lexicon, "Binder lexicon (comma-delimited)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--archive", archive, "encoder-space embedding archive")->required()->check(CLI::ExistingFile);
    cmd->add_option("--periods", periods, "periods to pool for corpus means (default: all)")->delimiter(',');
    cmd->add_option("--model", model, "lt or mlp")->check(CLI::IsMember({"lt", "mlp"}));
    cmd->add_option("--epochs", epochs)->check(CLI::PositiveNumber);
    cmd->add_option("--batch-size", batch_size)->check(CLI::PositiveNumber);
    cmd->add_option("--learning-rate", learning_rate)->check(CLI::PositiveNumber);
  }

  TrainConfig config(std::uint64_t seed) const {
    TrainConfig c;
    c.epochs = epochs;
    c.batch_size = batch_size;
    c.learning_rate = learning_rate;
    c.seed = seed;
    c.validate();
    return c;
  }

  TrainingPairs pairs() const {
    const auto lex = load_lexicon(lexicon);
    const auto arch = load_archive(archive, format);
    const std::set<std::string> ps(periods.begin(), periods.end());
    auto out = build_training_pairs(lex, arch, ps);
    for (const auto& w : out.skipped) warn("lexicon word '" + w + "' has no occurrences; skipped");
    return out;
  }

  void describe(Metadata& meta) const {
    meta.add("lexicon", lexicon);
    meta.add("archive", archive);
    meta.add("periods", periods.empty() ? "all" : join(periods, ","));
    meta.add("model", model);
  }
};

int run_train(const CommonTrain& opts, std::uint64_t seed, const std::string& out,
              const std::string& report) {
  const auto config = opts.config(seed);
  const auto pairs = opts.pairs();
  const auto kind = parse_model_kind(opts.model);
  const auto result = train(pairs.set, config, kind);
  save_model(result.model, config, out);

  Metadata meta("train", seed);
  opts.describe(meta);
  meta.add("train_config", config.describe());
  meta.add_count("pairs", pairs.set.size());
  meta.add_count("skipped", pairs.skipped.size());
  std::string body = meta.block();
  body += "epoch\ttrain_loss\n";
  for (std::size_t e = 0; e < result.train_loss.size(); ++e) {
    body += std::to_string(e + 1) + "\t" + text::format_double(result.train_loss[e]) + "\n";
  }
  emit(report, body);
  return 0;
}

int run_cross_validate(const CommonTrain& opts, std::uint64_t seed, std::size_t folds,
                       const std::string& out) {
  const auto config = opts.config(seed);
  const auto pairs = opts.pairs();
  const auto report = cross_validate(pairs.set, config, parse_model_kind(opts.model), folds);
  Metadata meta("cross-validate", seed);
  opts.describe(meta);
  meta.add_count("folds", folds);
  meta.add_count("pairs", pairs.set.size());
  meta.add_count("skipped", pairs.skipped.size());
  emit(out, meta.block() + format_cv_report(report));
  return 0;
}

// Streams the input archive through the model. Output values are stored as
// float32 and kept strictly inside (0, 6) after rounding.
int run_map(const std::string& model_path, const std::string& in, const std::string& in_format,
            const std::string& out, const std::string& out_format) {
  const auto model = load_model(model_path);
  const auto in_fmt = archive_format(in, in_format);
  const auto out_fmt = archive_format(out, out_format);
  auto header = scan_header(in, in_fmt);
  if (header.dimension != model.input_dim()) {
    throw Error(ErrorCode::Shape, "archive dimension " + std::to_string(header.dimension) +
                                      " does not match model input " +
                                      std::to_string(model.input_dim()));
  }
  ArchiveHeader out_header;
  out_header.dimension = model.output_dim();
  out_header.provenance.encoder = "lscb " BINDERLSC_VERSION " map " + to_string(model.kind()) +
                                  " <- " + header.provenance.encoder;
  out_header.provenance.corpus = header.provenance.corpus;
  out_header.keys = std::move(header.keys);

  ArchiveReader reader(in, in_fmt);
  ArchiveWriter writer(out, out_fmt, std::move(out_header));
  const float lo = std::numeric_limits<float>::denorm_min();
  const float hi = std::nextafter(6.0f, 0.0f);
  UsageRecord rec;
  Eigen::VectorXd x(static_cast<Eigen::Index>(model.input_dim()));
  while (reader.next(rec)) {
    for (std::size_t i = 0; i < rec.vector.size(); ++i) {
      x[static_cast<Eigen::Index>(i)] = static_cast<double>(rec.vector[i]);
    }
    const Eigen::VectorXd y = model.predict(x);
    rec.vector.resize(static_cast<std::size_t>(y.size()));
    for (Eigen::Index j = 0; j < y.size(); ++j) {
      rec.vector[static_cast<std::size_t>(j)] = std::clamp(static_cast<float>(y[j]), lo, hi);
    }
    writer.append(rec);
  }
  writer.finish();
  return 0;
}

struct PairedArchives {
  std::string from;
  std::string to;
  std::string format;
  std::optional<std::string> from_period;
  std::optional<std::string> to_period;
  std::string words;

  void attach(CLI::App* cmd) {
    cmd->add_option("--from", from, "archive for the earlier period")->required()->check(CLI::ExistingFile);
    cmd->add_option("--to", to, "archive for the later period")->required()->check(CLI::ExistingFile);
    cmd->add_option("--from-period", from_period, "period label to select in --from (default: all)");
    cmd->add_option("--to-period", to_period, "period label to select in --to (default: all)");
    cmd->add_option("--words", words, "restrict to these words, one per line")->check(CLI::ExistingFile);
  }

  void describe(Metadata& meta) const {
    meta.add("from", from);
    meta.add("from_period", from_period.value_or("all"));
    meta.add("to", to);
    meta.add("to_period", to_period.value_or("all"));
    if (!words.empty()) meta.add("words_file", words);
  }
};

int run_apd(const PairedArchives& in, std::uint64_t seed, const std::string& distance_name,
            std::optional<std::uint64_t> cap, const std::string& out) {
  const auto kind = parse_distance_kind(distance_name);
  const auto a = load_archive(in.from, in.format);
  const auto b = load_archive(in.to, in.format);
  const auto pa = period_selection(in.from_period);
  const auto pb = period_selection(in.to_period);
  const auto words = shared_words(a, pa, b, pb, in.words);
  const auto sampling_seed = derive_seed(seed, "apd-sampling");

  std::string rows;
  std::size_t sampled = 0;
  for (const auto& w : words) {
    ApdOptions o{kind, cap, derive_seed(sampling_seed, w)};
    const auto r = apd(a.pooled_usage_set(w, pa), b.pooled_usage_set(w, pb), o);
    if (r.sampled) ++sampled;
    rows += w + "\t" + text::format_double(r.value) + "\n";
  }
  Metadata meta("apd", seed);
  in.describe(meta);
  meta.add("distance", to_string(kind));
  meta.add("sample_cap", cap ? std::to_string(*cap) : std::string("none"));
  meta.add_count("words", words.size());
  meta.add_count("sampled_words", sampled);
  emit(out, meta.block() + rows);
  return 0;
}

int run_lsc_vectors(const PairedArchives& in, std::uint64_t seed, const std::string& lexicon,
                    const std::string& out) {
  const auto names = lexicon.empty() ? canonical_feature_names()
                                     : load_lexicon(lexicon).features().names();
  const auto a = load_archive(in.from, in.format);
  const auto b = load_archive(in.to, in.format);
  for (const auto* ar : {&a, &b}) {
    if (ar->dimension() != names.size()) {
      throw Error(ErrorCode::Shape, "LSC vectors need Binder-space archives (dimension " +
                                        std::to_string(names.size()) + "), got " +
                                        std::to_string(ar->dimension()));
    }
  }
  const auto pa = period_selection(in.from_period);
  const auto pb = period_selection(in.to_period);
  LscTable table{names, {}};
  for (const auto& w : shared_words(a, pa, b, pb, in.words)) {
    const auto from = a.pooled_usage_set(w, pa);
    const auto to = b.pooled_usage_set(w, pb);
    table.vectors.push_back({w, in.from_period.value_or(from.period),
                             in.to_period.value_or(to.period),
                             lsc_difference(from.vectors, to.vectors)});
  }
  Metadata meta("lsc-vectors", seed);
  in.describe(meta);
  meta.add("features", lexicon.empty() ? std::string("canonical") : lexicon);
  meta.add_count("words", table.vectors.size());
  emit(out, meta.block() + format_lsc_table(table));
  return 0;
}

int run_score_valence(const std::string& vectors, std::uint64_t seed, const std::string& polarity_name,
                      const std::string& out) {
  const auto table = parse_lsc_table(text::read_file(vectors));
  const auto sets = valence_sets(FeatureIndex(table.feature_names));
  const auto polarity = parse_polarity(polarity_name);
  std::string rows = "word\tscore\n";
  std::size_t positive = 0;
  const auto ranked = rank_by_lsc_score(table.vectors, sets, polarity);
  for (const auto& [w, s] : ranked) {
    if (s > 0) ++positive;
    rows += w + "\t" + text::format_double(s) + "\n";
  }
  Metadata meta("score-valence", seed);
  meta.add("vectors", vectors);
  meta.add("polarity", to_string(polarity));
  meta.add_count("words", ranked.size());
  meta.add_count("positive_scores", positive);
  emit(out, meta.block() + rows);
  return 0;
}

int run_sparse_pca(const std::string& vectors, std::uint64_t seed, std::size_t top_n,
                   std::size_t components, std::optional<double> alpha, std::size_t top_words,
                   const std::string& out_dir) {
  const auto table = parse_lsc_table(text::read_file(vectors));
  const FeatureIndex features(table.feature_names);
  auto chosen = top_n == 0 ? table.vectors : rank_by_norm(table.vectors, top_n);
  std::sort(chosen.begin(), chosen.end(),
            [](const LscVector& a, const LscVector& b) { return a.word < b.word; });
  std::vector<std::string> labels;
  for (const auto& v : chosen) labels.push_back(v.word);
  const Eigen::MatrixXd x = stack_values(chosen);

  SparsePcaOptions opts;
  opts.n_components = components;
  opts.seed = seed;
  SparsePcaModel model;
  std::string ladder;
  if (alpha) {
    opts.alpha = *alpha;
    model = sparse_pca_fit(x, opts, labels);
  } else {
    auto cal = calibrate_alpha(x, opts, 0.5, labels);
    for (const auto& [a, z] : cal.ladder) {
      if (!ladder.empty()) ladder += " ";
      ladder += text::format_double(a) + "->" + text::format_fixed(z, 3);
    }
    model = std::move(cal.model);
  }
  for (const auto& w : model.warnings) warn(w);

  Metadata meta("sparse-pca", seed);
  meta.add("vectors", vectors);
  meta.add("top_n", top_n == 0 ? std::string("all") : std::to_string(top_n));
  meta.add_count("rows", chosen.size());
  meta.add_count("components", components);
  meta.add("alpha", model.alpha);
  meta.add("alpha_source", alpha ? std::string("flag") : std::string("calibrated"));
  if (!ladder.empty()) meta.add("alpha_ladder", ladder);
  meta.add_count("iterations", model.iterations);
  meta.add("converged", model.converged ? std::string("yes") : std::string("no"));
  meta.add("zero_fraction", model.zero_fraction());
  meta.add("objective", model.final_objective);
  const std::string head = meta.block();
  const auto k = static_cast<std::size_t>(model.components.rows());
  auto pc = [](std::size_t c) { return "PC" + std::to_string(c + 1); };

  fs::create_directories(out_dir);
  std::string comps = head + "component";
  for (const auto& n : features.names()) comps += "\t" + n;
  comps += "\n";
  for (std::size_t c = 0; c < k; ++c) {
    comps += pc(c);
    for (Eigen::Index j = 0; j < model.components.cols(); ++j) {
      comps += "\t" + text::format_double(model.components(static_cast<Eigen::Index>(c), j));
    }
    comps += "\n";
  }
  text::write_file(fs::path(out_dir) / "components.tsv", comps);

  // Heatmap layout: one row per feature, one column per component.
  std::string grid = head + "feature";
  for (std::size_t c = 0; c < k; ++c) grid += "\t" + pc(c);
  grid += "\n";
  for (std::size_t j = 0; j < features.size(); ++j) {
    grid += features.name_at(j);
    for (std::size_t c = 0; c < k; ++c) {
      grid += "\t" + text::format_double(
                         model.components(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j)));
    }
    grid += "\n";
  }
  text::write_file(fs::path(out_dir) / "grid.tsv", grid);

  std::string proj = head + "word";
  for (std::size_t c = 0; c < k; ++c) proj += "\t" + pc(c);
  proj += "\n";
  for (std::size_t r = 0; r < labels.size(); ++r) {
    proj += labels[r];
    for (std::size_t c = 0; c < k; ++c) {
      proj += "\t" + text::format_double(
                         model.projections(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
    }
    proj += "\n";
  }
  text::write_file(fs::path(out_dir) / "projections.tsv", proj);

  const std::size_t n_words = std::min(top_words, labels.size());
  std::string top = head + "component\tfeature_1\tfeature_2\tfeature_3\twords_up\twords_down\n";
  for (std::size_t c = 0; c < k; ++c) {
    top += pc(c);
    for (const auto& [name, loading] : top_features(model, c, 3, features)) {
      top += "\t" + name + "(" + text::format_fixed(loading, 3) + ")";
    }
    std::vector<std::string> up, down;
    for (const auto& [w, s] : extreme_words(model, c, n_words, Extreme::Top)) up.push_back(w);
    for (const auto& [w, s] : extreme_words(model, c, n_words, Extreme::Bottom)) down.push_back(w);
    top += "\t↑ " + join(up, ", ") + "\t↓ " + join(down, ", ") + "\n";
  }
  text::write_file(fs::path(out_dir) / "top3.tsv", top);
  return 0;
}

int run_cluster_usages(const std::string& archive_path, const std::string& format, std::uint64_t seed,
                       const std::string& word, const std::vector<std::string>& periods,
                       std::size_t fixed_k, std::size_t k_min, std::size_t k_max,
                       std::size_t restarts, std::size_t nearest, const std::string& out_dir) {
  const auto archive = load_archive(archive_path, format);
  const std::set<std::string> selected(periods.begin(), periods.end());
  const auto pooled = archive.pooled_usage_set(word, selected);

  Metadata meta("cluster-usages", seed);
  meta.add("archive", archive_path);
  meta.add("word", word);
  meta.add("periods", describe_set(selected));
  meta.add_count("occurrences", static_cast<std::size_t>(pooled.vectors.rows()));
  meta.add_count("restarts", restarts);

  std::size_t k = fixed_k;
  if (k == 0) {
    const auto sel = select_k(pooled.vectors, k_min, k_max, derive_seed(seed, "select-k"), restarts);
    k = sel.k;
    std::string sil;
    for (const auto& [kk, s] : sel.silhouettes) {
      if (!sil.empty()) sil += " ";
      sil += std::to_string(kk) + ":" + text::format_fixed(s, 4);
    }
    meta.add("k_range", std::to_string(k_min) + ".." + std::to_string(k_max));
    meta.add("silhouettes", sil);
    for (const auto& w : sel.warnings) warn(w);
  }
  meta.add_count("k", k);
  const auto model = kmeans_fit(pooled.vectors, {k, derive_seed(seed, "kmeans"), restarts, 300},
                                pooled.occurrence_ids);
  meta.add("inertia", model.inertia);
  const std::string head = meta.block();
  fs::create_directories(out_dir);

  // Period of every pooled occurrence, for the assignment table.
  std::vector<UsageSet> per_period;
  std::map<std::string, std::string> period_of;
  for (const auto& p : archive.periods()) {
    if (!selected.empty() && !selected.contains(p)) continue;
    if (!archive.has(word, p)) continue;
    per_period.push_back(archive.usage_set(word, p));
    for (const auto& id : per_period.back().occurrence_ids) period_of[id] = p;
  }

  std::string assign = head + "occurrence_id\tperiod\tcluster\n";
  for (std::size_t i = 0; i < model.labels.size(); ++i) {
    const auto& id = pooled.occurrence_ids[i];
    assign += id + "\t" + period_of[id] + "\t" + std::to_string(model.labels[i]) + "\n";
  }
  text::write_file(fs::path(out_dir) / "assignments.tsv", assign);

  const auto dist = usage_distribution(model, per_period);
  std::string hist = head + "period\tcount";
  for (std::size_t c = 0; c < k; ++c) hist += "\tcluster_" + std::to_string(c);
  hist += "\n";
  for (const auto& [p, props] : dist.periods) {
    hist += p + "\t" + std::to_string(dist.counts.at(p));
    for (double v : props) hist += "\t" + text::format_fixed(v, 6);
    hist += "\n";
  }
  text::write_file(fs::path(out_dir) / "histograms.tsv", hist);

  std::string near = head + "cluster\trank\toccurrence_id\tdistance\n";
  for (std::size_t c = 0; c < k; ++c) {
    const auto ex = nearest_examples(model, pooled.vectors, pooled.occurrence_ids, c, nearest);
    for (const auto& w : ex.warnings) warn(w);
    for (std::size_t i = 0; i < ex.occurrence_ids.size(); ++i) {
      near += std::to_string(c) + "\t" + std::to_string(i + 1) + "\t" + ex.occurrence_ids[i] +
              "\t" + text::format_double(ex.distances[i]) + "\n";
    }
  }
  text::write_file(fs::path(out_dir) / "nearest.tsv", near);
  return 0;
}

int run_eval(const std::string& gold_path, const std::string& pred_path, std::uint64_t seed,
             const std::string& out) {
  const auto gold = load_score_table(gold_path);
  const auto pred = load_score_table(pred_path);
  const double rho = evaluate(gold, pred);
  Metadata meta("eval", seed);
  meta.add("gold", gold_path);
  meta.add("pred", pred_path);
  std::string body = meta.block();
  body += "spearman: " + text::format_fixed(rho, 3) + "\n";
  body += "result\tspearman=" + text::format_double(rho) + "\tn=" + std::to_string(gold.size()) + "\n";
  emit(out, body);
  return 0;
}

int run_select_targets(const std::string& lemmas, const std::string& vocab, std::uint64_t seed,
                       const std::string& out) {
  const auto sel = select_targets(load_candidates(lemmas), load_vocabulary(vocab));
  Metadata meta("select-targets", seed);
  meta.add("lemmas", lemmas);
  meta.add("vocab", vocab);
  meta.add_count("selected", sel.words.size());
  meta.add_count("rejected_non_alphabetic", sel.rejected_non_alphabetic);
  meta.add_count("rejected_vocabulary", sel.rejected_vocabulary);
  meta.add_count("rejected_senses", sel.rejected_senses);
  meta.add_count("rejected_length", sel.rejected_length);
  if (sel.rejected_non_alphabetic) {
    warn(std::to_string(sel.rejected_non_alphabetic) + " lemmas with non-letter characters dropped");
  }
  std::string body = meta.block();
  for (const auto& w : sel.words) body += w + "\n";
  emit(out, body);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Binder-space lexical semantic change toolkit"};
  app.set_version_flag("--version", BINDERLSC_VERSION);
  app.require_subcommand(1);
  app.fallthrough();
  std::uint64_t seed = kDefaultSeed;
  std::string format;
  app.add_option("--seed", seed, "run seed; every random component derives from it")->capture_default_str();
  app.add_option("--format", format, "archive format override")->check(CLI::IsMember({"jsonl", "packed"}));

  std::function<int()> action;

  CommonTrain train_opts;
  std::string train_out, train_report;
  auto* train_cmd = app.add_subcommand("train", "fit the encoder-to-Binder regression");
  train_opts.attach(train_cmd);
  train_cmd->add_option("--out", train_out, "model checkpoint")->required();
  train_cmd->add_option("--report", train_report, "per-epoch loss table (default: stdout)");
  train_cmd->callback([&] {
    action = [&] {
      train_opts.format = format;
      return run_train(train_opts, seed, train_out, train_report); };
  });

  CommonTrain cv_opts;
  std::size_t folds = 10;
  std::string cv_out;
  auto* cv_cmd = app.add_subcommand("cross-validate", "k-fold cross-validation report");
  cv_opts.attach(cv_cmd);
  cv_cmd->add_option("--folds", folds)->check(CLI::Range(2, 1000));
  cv_cmd->add_option("--out", cv_out, "report file (default: stdout)");
  cv_cmd->callback([&] {
    action = [&] {
      cv_opts.format = format;
      return run_cross_validate(cv_opts, seed, folds, cv_out); };
  });

  std::string map_model, map_in, map_out, map_in_format;
  auto* map_cmd = app.add_subcommand("map", "project an archive into Binder space");
  map_cmd->add_option("--model", map_model)->required()->check(CLI::ExistingFile);
  map_cmd->add_option("--in", map_in)->required()->check(CLI::ExistingFile);
  map_cmd->add_option("--in-format", map_in_format)->check(CLI::IsMember({"jsonl", "packed"}));
  map_cmd->add_option("--out", map_out)->required();
  map_cmd->callback([&] {
    action = [&] { return run_map(map_model, map_in, map_in_format, map_out, format); };
  });

  PairedArchives apd_in;
  std::string distance_name = "cosine", apd_out;
  std::optional<std::uint64_t> sample_cap;
  auto* apd_cmd = app.add_subcommand("apd", "average pairwise distance per word");
  apd_in.attach(apd_cmd);
  apd_cmd->add_option("--distance", distance_name)->check(CLI::IsMember({"euclid", "cosine", "spearman"}));
  apd_cmd->add_option("--sample-cap", sample_cap, "average over at most N sampled pairs")
      ->check(CLI::PositiveNumber);
  apd_cmd->add_option("--out", apd_out, "score file (default: stdout)");
  apd_cmd->callback([&] {
    action = [&] {
      apd_in.format = format;
      return run_apd(apd_in, seed, distance_name, sample_cap, apd_out); };
  });

  PairedArchives lsc_in;
  std::string lsc_lexicon, lsc_out;
  auto* lsc_cmd = app.add_subcommand("lsc-vectors", "per-word LSC vectors from Binder-space archives");
  lsc_in.attach(lsc_cmd);
  lsc_cmd->add_option("--lexicon", lsc_lexicon, "take feature names from this lexicon header")
      ->check(CLI::ExistingFile);
  lsc_cmd->add_option("--out", lsc_out, "vector table (default: stdout)");
  lsc_cmd->callback([&] {
    action = [&] {
      lsc_in.format = format;
      return run_lsc_vectors(lsc_in, seed, lsc_lexicon, lsc_out); };
  });

  std::string val_vectors, polarity = "pos", val_out;
  auto* val_cmd = app.add_subcommand("score-valence", "rank words by valence LSC score");
  val_cmd->add_option("--vectors", val_vectors)->required()->check(CLI::ExistingFile);
  val_cmd->add_option("--polarity", polarity)->check(CLI::IsMember({"pos", "neg"}));
  val_cmd->add_option("--out", val_out, "ranking (default: stdout)");
  val_cmd->callback([&] {
    action = [&] { return run_score_valence(val_vectors, seed, polarity, val_out); };
  });

  std::string spca_vectors, spca_dir;
  std::size_t top_n = 0, n_components = 10, top_words = 3;
  std::optional<double> alpha;
  auto* spca_cmd = app.add_subcommand("sparse-pca", "sparse components over LSC vectors");
  spca_cmd->add_option("--vectors", spca_vectors)->required()->check(CLI::ExistingFile);
  spca_cmd->add_option("--top-n", top_n, "keep the N largest-norm vectors (default: all)");
  spca_cmd->add_option("--components", n_components)->check(CLI::PositiveNumber);
  spca_cmd->add_option("--alpha", alpha, "L1 weight (default: calibrated to >= 50% zeros)")
      ->check(CLI::NonNegativeNumber);
  spca_cmd->add_option("--top-words", top_words, "words listed per direction in top3.tsv")
      ->check(CLI::PositiveNumber);
  spca_cmd->add_option("--out-dir", spca_dir)->required();
  spca_cmd->callback([&] {
    action = [&] {
      return run_sparse_pca(spca_vectors, seed, top_n, n_components, alpha, top_words, spca_dir);
    };
  });

  std::string cl_archive, cl_word, cl_dir;
  std::vector<std::string> cl_periods;
  std::size_t cl_k = 0, k_min = 2, k_max = 10, restarts = 10, nearest = 5;
  auto* cl_cmd = app.add_subcommand("cluster-usages", "k-means usage types for one word");
  cl_cmd->add_option("--archive", cl_archive)->required()->check(CLI::ExistingFile);
  cl_cmd->add_option("--word", cl_word)->required();
  cl_cmd->add_option("--periods", cl_periods, "periods to pool (default: all)")->delimiter(',');
  cl_cmd->add_option("--k", cl_k, "fixed cluster count (default: silhouette selection)")
      ->check(CLI::PositiveNumber);
  cl_cmd->add_option("--k-min", k_min)->check(CLI::Range(2, 1000));
  cl_cmd->add_option("--k-max", k_max)->check(CLI::Range(2, 1000));
  cl_cmd->add_option("--restarts", restarts)->check(CLI::PositiveNumber);
  cl_cmd->add_option("--nearest", nearest)->check(CLI::PositiveNumber);
  cl_cmd->add_option("--out-dir", cl_dir)->required();
  cl_cmd->callback([&] {
    action = [&] {
      return run_cluster_usages(cl_archive, format, seed, cl_word, cl_periods, cl_k, k_min, k_max,
                                restarts, nearest, cl_dir);
    };
  });

  std::string gold, pred, eval_out;
  auto* eval_cmd = app.add_subcommand("eval", "Spearman correlation against graded gold scores");
  eval_cmd->add_option("--gold", gold)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--pred", pred)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", eval_out, "result file (default: stdout)");
  eval_cmd->callback([&] { action = [&] { return run_eval(gold, pred, seed, eval_out); }; });

  std::string lemmas, vocab, sel_out;
  auto* sel_cmd = app.add_subcommand("select-targets", "filter candidate lemmas into target words");
  sel_cmd->add_option("--lemmas", lemmas, "lemma<TAB>sense-count file")->required()->check(CLI::ExistingFile);
  sel_cmd->add_option("--vocab", vocab, "encoder vocabulary, one token per line")
      ->required()
      ->check(CLI::ExistingFile);
  sel_cmd->add_option("--out", sel_out, "word list (default: stdout)");
  sel_cmd->callback([&] { action = [&] { return run_select_targets(lemmas, vocab, seed, sel_out); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    return action();
  } catch (const Error& e) {
    std::cerr << "error: code=" << error_code_name(e.code()) << " " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: code=INTERNAL " << e.what() << "\n";
    return 1;
  }
}
