#include <optional>
#include <set>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "binderlsc/clustering.hpp"
#include "binderlsc/embedding_store.hpp"
#include "binderlsc/error.hpp"
#include "binderlsc/eval.hpp"
#include "binderlsc/lexicon.hpp"
#include "binderlsc/lsc_metrics.hpp"
#include "binderlsc/pipeline.hpp"
#include "binderlsc/regressor.hpp"
#include "binderlsc/sparse_pca.hpp"
#include "binderlsc/target_selection.hpp"

namespace py = pybind11;
using namespace binderlsc;

namespace {

ArchiveFormat pick_format(const std::filesystem::path& path, const std::string& name) {
  if (name == "jsonl" || name == "lines") return ArchiveFormat::Lines;
  if (name == "packed") return ArchiveFormat::Packed;
  if (name == "auto") return format_from_extension(path);
  throw Error(ErrorCode::Config, "unknown archive format '" + name + "'");
}

Extreme parse_extreme(const std::string& name) {
  if (name == "top") return Extreme::Top;
  if (name == "bottom") return Extreme::Bottom;
  throw Error(ErrorCode::Config, "direction must be 'top' or 'bottom'");
}

TrainingSet make_set(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets) {
  TrainingSet s;
  s.inputs = inputs;
  s.targets = targets;
  return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Binder-space lexical semantic change toolkit";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_storage;
  error_storage.call_once_and_store_result(
      [&]() { return py::exception<Error>(m, "BinderLscError", PyExc_RuntimeError); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const py::object& type = error_storage.get_stored();
      py::object inst = type(e.what());
      inst.attr("code") = std::string(error_code_name(e.code()));
      PyErr_SetObject(type.ptr(), inst.ptr());
    }
  });

  // binder-lexicon
  m.def("canonical_feature_names", &canonical_feature_names);
  py::class_<ValenceFeatureSets>(m, "ValenceFeatureSets")
      .def_readonly("positive", &ValenceFeatureSets::positive)
      .def_readonly("negative", &ValenceFeatureSets::negative);
  py::class_<BinderLexicon>(m, "BinderLexicon")
      .def_property_readonly("feature_names",
                             [](const BinderLexicon& l) { return l.features().names(); })
      .def_property_readonly("has_pos", &BinderLexicon::has_pos)
      .def("__len__", &BinderLexicon::size)
      .def("__contains__", [](const BinderLexicon& l, const std::string& w) { return l.contains(w); })
      .def("words",
           [](const BinderLexicon& l) {
             std::vector<std::string> out;
             for (const auto& [w, e] : l.entries()) out.push_back(w);
             return out;
           })
      .def("vector", [](const BinderLexicon& l, const std::string& w) { return l.at(w).values; })
      .def("pos", [](const BinderLexicon& l, const std::string& w) { return l.at(w).pos; })
      .def("pos_counts", &BinderLexicon::pos_counts);
  m.def("load_lexicon", &load_lexicon, py::arg("path"));
  m.def("parse_lexicon", [](const std::string& text) { return parse_lexicon(text); }, py::arg("text"));
  m.def("serialize_lexicon", &serialize_lexicon);
  m.def("valence_sets", py::overload_cast<const BinderLexicon&>(&valence_sets));
  m.def("valence_sets",
        [](const std::vector<std::string>& names) { return valence_sets(FeatureIndex(names)); },
        py::arg("feature_names"));

  // embedding-store
  py::class_<UsageSet>(m, "UsageSet")
      .def(py::init([](std::string word, std::string period, Eigen::MatrixXd vectors,
                       std::vector<std::string> ids) {
             return UsageSet{std::move(word), std::move(period), std::move(vectors), std::move(ids)};
           }),
           py::arg("word"), py::arg("period"), py::arg("vectors"),
           py::arg("occurrence_ids") = std::vector<std::string>{})
      .def_readonly("word", &UsageSet::word)
      .def_readonly("period", &UsageSet::period)
      .def_readonly("vectors", &UsageSet::vectors)
      .def_readonly("occurrence_ids", &UsageSet::occurrence_ids);
  py::class_<EmbeddingArchive>(m, "EmbeddingArchive")
      .def(py::init([](std::size_t dim, std::string encoder, std::string corpus) {
             return EmbeddingArchive(dim, {std::move(encoder), std::move(corpus)});
           }),
           py::arg("dimension"), py::arg("encoder") = "", py::arg("corpus") = "")
      .def_property_readonly("dimension", &EmbeddingArchive::dimension)
      .def_property_readonly("encoder", [](const EmbeddingArchive& a) { return a.provenance().encoder; })
      .def_property_readonly("corpus", [](const EmbeddingArchive& a) { return a.provenance().corpus; })
      .def("__len__", &EmbeddingArchive::size)
      .def("add",
           [](EmbeddingArchive& a, std::string word, std::string period, std::string id,
              std::vector<float> v) {
             a.add({std::move(word), std::move(period), std::move(id), std::move(v)});
           },
           py::arg("word"), py::arg("period"), py::arg("occurrence_id"), py::arg("vector"))
      .def("words", &EmbeddingArchive::words)
      .def("periods", &EmbeddingArchive::periods)
      .def("has", &EmbeddingArchive::has)
      .def("usage_set", &EmbeddingArchive::usage_set)
      .def("pooled_usage_set", &EmbeddingArchive::pooled_usage_set, py::arg("word"),
           py::arg("periods") = std::set<std::string>{});
  m.def("read_archive",
        [](const std::filesystem::path& p, const std::string& f) { return read_archive(p, pick_format(p, f)); },
        py::arg("path"), py::arg("format") = "auto");
  m.def("write_archive",
        [](const EmbeddingArchive& a, const std::filesystem::path& p, const std::string& f) {
          write_archive(a, p, pick_format(p, f));
        },
        py::arg("archive"), py::arg("path"), py::arg("format") = "auto");
  m.def("corpus_mean", &corpus_mean, py::arg("archive"), py::arg("word"),
        py::arg("periods") = std::set<std::string>{});

  // regressor
  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("hidden", &TrainConfig::hidden)
      .def("validate", &TrainConfig::validate)
      .def("describe", &TrainConfig::describe);
  py::class_<RegressionModel>(m, "RegressionModel")
      .def_property_readonly("kind", [](const RegressionModel& r) { return to_string(r.kind()); })
      .def_property_readonly("input_dim", &RegressionModel::input_dim)
      .def_property_readonly("output_dim", &RegressionModel::output_dim)
      .def_property_readonly("hidden_widths", &RegressionModel::hidden_widths)
      .def_property_readonly("parameter_count", &RegressionModel::parameter_count)
      .def("predict", &RegressionModel::predict, py::arg("x"))
      .def("predict_batch", &RegressionModel::predict_batch, py::arg("x"))
      .def("loss", &RegressionModel::loss)
      .def("save", [](const RegressionModel& r, const std::filesystem::path& p,
                      const TrainConfig& c) { save_model(r, c, p); },
           py::arg("path"), py::arg("config") = TrainConfig{});
  m.def("load_model", &load_model, py::arg("path"));
  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("model", &TrainResult::model)
      .def_readonly("train_loss", &TrainResult::train_loss)
      .def_readonly("eval_mse", &TrainResult::eval_mse);
  m.def("train",
        [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const std::string& kind,
           const TrainConfig& config, std::optional<Eigen::MatrixXd> ex,
           std::optional<Eigen::MatrixXd> ey) {
          const auto data = make_set(x, y);
          if (ex.has_value() != ey.has_value()) {
            throw Error(ErrorCode::Validation, "eval_inputs and eval_targets go together");
          }
          if (ex) {
            const auto eval = make_set(*ex, *ey);
            return train(data, config, parse_model_kind(kind), &eval);
          }
          return train(data, config, parse_model_kind(kind));
        },
        py::arg("inputs"), py::arg("targets"), py::arg("kind") = "lt",
        py::arg("config") = TrainConfig{}, py::arg("eval_inputs") = py::none(),
        py::arg("eval_targets") = py::none());
  py::class_<CvReport>(m, "CvReport")
      .def_readonly("k", &CvReport::k)
      .def_readonly("fold_sizes", &CvReport::fold_sizes)
      .def_readonly("fold_min_mse", &CvReport::fold_min_mse)
      .def_readonly("fold_best_epoch", &CvReport::fold_best_epoch)
      .def_readonly("traces", &CvReport::traces)
      .def_readonly("mean_min_mse", &CvReport::mean_min_mse)
      .def("format", [](const CvReport& r) { return format_cv_report(r); });
  m.def("cross_validate",
        [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const std::string& kind,
           const TrainConfig& config, std::size_t k) {
          return cross_validate(make_set(x, y), config, parse_model_kind(kind), k);
        },
        py::arg("inputs"), py::arg("targets"), py::arg("kind") = "lt",
        py::arg("config") = TrainConfig{}, py::arg("k") = 10);
  m.def("make_folds", &make_folds, py::arg("n"), py::arg("k"), py::arg("seed"));
  m.def("mse", py::overload_cast<const Eigen::MatrixXd&, const Eigen::MatrixXd&>(&mse));
  m.def("training_pairs",
        [](const BinderLexicon& lex, const EmbeddingArchive& a, const std::set<std::string>& periods) {
          auto p = build_training_pairs(lex, a, periods);
          return py::make_tuple(p.set.inputs, p.set.targets, p.set.words, p.skipped);
        },
        py::arg("lexicon"), py::arg("archive"), py::arg("periods") = std::set<std::string>{},
        "(inputs, targets, words, skipped) from corpus means of lexicon words");

  // lsc-metrics
  m.def("distance",
        [](const std::string& kind, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
          return distance(parse_distance_kind(kind), u, v);
        },
        py::arg("kind"), py::arg("u"), py::arg("v"));
  py::class_<ApdResult>(m, "ApdResult")
      .def_readonly("value", &ApdResult::value)
      .def_readonly("pairs_used", &ApdResult::pairs_used)
      .def_readonly("sampled", &ApdResult::sampled);
  m.def("apd",
        [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const std::string& kind,
           std::optional<std::uint64_t> cap, std::uint64_t seed) {
          return apd(a, b, {parse_distance_kind(kind), cap, seed});
        },
        py::arg("a"), py::arg("b"), py::arg("kind") = "cosine", py::arg("sample_cap") = py::none(),
        py::arg("seed") = 0);
  py::class_<LscVector>(m, "LscVector")
      .def(py::init([](std::string w, std::string from, std::string to, Eigen::VectorXd v) {
             return LscVector{std::move(w), std::move(from), std::move(to), std::move(v)};
           }),
           py::arg("word"), py::arg("period_from"), py::arg("period_to"), py::arg("values"))
      .def_readonly("word", &LscVector::word)
      .def_readonly("period_from", &LscVector::period_from)
      .def_readonly("period_to", &LscVector::period_to)
      .def_readonly("values", &LscVector::values);
  m.def("lsc_difference", &lsc_difference, py::arg("earlier"), py::arg("later"));
  m.def("lsc_vector", &lsc_vector, py::arg("earlier"), py::arg("later"));
  m.def("lsc_score",
        [](const LscVector& v, const ValenceFeatureSets& s, const std::string& pol) {
          return lsc_score(v, s, parse_polarity(pol));
        },
        py::arg("vector"), py::arg("sets"), py::arg("polarity") = "pos");
  m.def("rank_by_norm", &rank_by_norm, py::arg("vectors"), py::arg("top_n"));
  m.def("rank_by_lsc_score",
        [](const std::vector<LscVector>& v, const ValenceFeatureSets& s, const std::string& pol) {
          return rank_by_lsc_score(v, s, parse_polarity(pol));
        },
        py::arg("vectors"), py::arg("sets"), py::arg("polarity") = "pos");

  // decomposition
  py::class_<SparsePcaModel>(m, "SparsePcaModel")
      .def_readonly("components", &SparsePcaModel::components)
      .def_readonly("mean", &SparsePcaModel::mean)
      .def_readonly("projections", &SparsePcaModel::projections)
      .def_readonly("row_labels", &SparsePcaModel::row_labels)
      .def_readonly("alpha", &SparsePcaModel::alpha)
      .def_readonly("iterations", &SparsePcaModel::iterations)
      .def_readonly("converged", &SparsePcaModel::converged)
      .def_readonly("degenerate", &SparsePcaModel::degenerate)
      .def_readonly("final_objective", &SparsePcaModel::final_objective)
      .def_readonly("reconstruction_error", &SparsePcaModel::reconstruction_error)
      .def_readonly("objective_trace", &SparsePcaModel::objective_trace)
      .def_readonly("warnings", &SparsePcaModel::warnings)
      .def("zero_fraction", &SparsePcaModel::zero_fraction);
  auto spca_options = [](std::size_t k, double alpha, std::uint64_t seed, std::size_t iters,
                         double tol) {
    SparsePcaOptions o;
    o.n_components = k;
    o.alpha = alpha;
    o.seed = seed;
    o.max_iterations = iters;
    o.tolerance = tol;
    return o;
  };
  m.def("sparse_pca_fit",
        [=](const Eigen::MatrixXd& x, std::size_t k, double alpha, std::uint64_t seed,
            std::size_t iters, double tol, std::vector<std::string> labels) {
          return sparse_pca_fit(x, spca_options(k, alpha, seed, iters, tol), std::move(labels));
        },
        py::arg("x"), py::arg("n_components") = 10, py::arg("alpha") = 1.0, py::arg("seed") = 0,
        py::arg("max_iterations") = 1000, py::arg("tolerance") = 1e-6,
        py::arg("row_labels") = std::vector<std::string>{});
  py::class_<AlphaCalibration>(m, "AlphaCalibration")
      .def_readonly("alpha", &AlphaCalibration::alpha)
      .def_readonly("ladder", &AlphaCalibration::ladder)
      .def_readonly("model", &AlphaCalibration::model);
  m.def("calibrate_alpha",
        [=](const Eigen::MatrixXd& x, std::size_t k, std::uint64_t seed, double target,
            std::vector<std::string> labels) {
          return calibrate_alpha(x, spca_options(k, 0.0, seed, 1000, 1e-6), target, std::move(labels));
        },
        py::arg("x"), py::arg("n_components") = 10, py::arg("seed") = 0,
        py::arg("target_zero_fraction") = 0.5, py::arg("row_labels") = std::vector<std::string>{});
  m.def("top_features",
        [](const SparsePcaModel& model, std::size_t c, std::size_t n,
           const std::vector<std::string>& names) {
          return top_features(model, c, n, FeatureIndex(names));
        },
        py::arg("model"), py::arg("component"), py::arg("n") = 3,
        py::arg("feature_names") = canonical_feature_names());
  m.def("extreme_words",
        [](const SparsePcaModel& model, std::size_t c, std::size_t n, const std::string& dir) {
          return extreme_words(model, c, n, parse_extreme(dir));
        },
        py::arg("model"), py::arg("component"), py::arg("n"), py::arg("direction") = "top");

  py::class_<ClusterModel>(m, "ClusterModel")
      .def_readonly("k", &ClusterModel::k)
      .def_readonly("centroids", &ClusterModel::centroids)
      .def_readonly("labels", &ClusterModel::labels)
      .def_readonly("occurrence_ids", &ClusterModel::occurrence_ids)
      .def_readonly("inertia", &ClusterModel::inertia)
      .def_readonly("iterations", &ClusterModel::iterations)
      .def_readonly("converged", &ClusterModel::converged)
      .def("assignments", &ClusterModel::assignments);
  m.def("kmeans_fit",
        [](const Eigen::MatrixXd& x, std::size_t k, std::uint64_t seed, std::size_t restarts,
           std::size_t iters, std::vector<std::string> ids) {
          return kmeans_fit(x, {k, seed, restarts, iters}, std::move(ids));
        },
        py::arg("x"), py::arg("k"), py::arg("seed") = 0, py::arg("restarts") = 10,
        py::arg("max_iterations") = 300, py::arg("occurrence_ids") = std::vector<std::string>{});
  py::class_<KSelection>(m, "KSelection")
      .def_readonly("k", &KSelection::k)
      .def_readonly("silhouettes", &KSelection::silhouettes)
      .def_readonly("warnings", &KSelection::warnings);
  m.def("select_k", &select_k, py::arg("x"), py::arg("k_min") = 2, py::arg("k_max") = 10,
        py::arg("seed") = 0, py::arg("restarts") = 10);
  m.def("mean_silhouette", &mean_silhouette, py::arg("x"), py::arg("labels"), py::arg("k"));
  py::class_<UsageTypeDistribution>(m, "UsageTypeDistribution")
      .def_readonly("word", &UsageTypeDistribution::word)
      .def_readonly("k", &UsageTypeDistribution::k)
      .def_readonly("periods", &UsageTypeDistribution::periods)
      .def_readonly("counts", &UsageTypeDistribution::counts);
  m.def("usage_distribution", &usage_distribution, py::arg("model"), py::arg("period_sets"));
  py::class_<NearestExamples>(m, "NearestExamples")
      .def_readonly("occurrence_ids", &NearestExamples::occurrence_ids)
      .def_readonly("distances", &NearestExamples::distances)
      .def_readonly("warnings", &NearestExamples::warnings);
  m.def("nearest_examples", &nearest_examples, py::arg("model"), py::arg("x"),
        py::arg("occurrence_ids"), py::arg("cluster"), py::arg("n") = 5);

  // eval
  m.def("spearman_rank_correlation",
        [](const std::vector<double>& a, const std::vector<double>& b) {
          return spearman_rank_correlation(a, b);
        },
        py::arg("a"), py::arg("b"));
  m.def("evaluate",
        [](const std::map<std::string, double>& gold, const std::map<std::string, double>& pred) {
          return evaluate(ScoreTable(gold.begin(), gold.end()), ScoreTable(pred.begin(), pred.end()));
        },
        py::arg("gold"), py::arg("predicted"));

  // target-selection
  py::class_<TargetSelection>(m, "TargetSelection")
      .def_readonly("words", &TargetSelection::words)
      .def_readonly("rejected_non_alphabetic", &TargetSelection::rejected_non_alphabetic)
      .def_readonly("rejected_vocabulary", &TargetSelection::rejected_vocabulary)
      .def_readonly("rejected_senses", &TargetSelection::rejected_senses)
      .def_readonly("rejected_length", &TargetSelection::rejected_length);
  m.def("select_targets",
        [](const std::map<std::string, std::size_t>& candidates, const std::set<std::string>& vocab) {
          return select_targets(CandidateLexicon(candidates.begin(), candidates.end()),
                                EncoderVocabulary(vocab.begin(), vocab.end()));
        },
        py::arg("candidates"), py::arg("vocabulary"));
}
