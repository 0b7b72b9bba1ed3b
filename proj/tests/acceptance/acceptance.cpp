// Acceptance suite: one PASS/FAIL/SKIP line per criterion.
//
// usage: acceptance <path-to-lscb>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <algorithm>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "binderlsc/clustering.hpp"
#include "binderlsc/embedding_store.hpp"
#include "binderlsc/eval.hpp"
#include "binderlsc/lexicon.hpp"
#include "binderlsc/lsc_metrics.hpp"
#include "binderlsc/regressor.hpp"
#include "binderlsc/rng.hpp"
#include "binderlsc/sparse_pca.hpp"
#include "binderlsc/text.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace binderlsc;

namespace {

struct Outcome {
  enum Kind { Pass, Fail, Skip } kind;
  std::string detail;
};

Outcome pass(std::string d) { return {Outcome::Pass, std::move(d)}; }
Outcome fail(std::string d) { return {Outcome::Fail, std::move(d)}; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

Outcome apd_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  const DistanceKind kinds[] = {DistanceKind::Euclidean, DistanceKind::Cosine, DistanceKind::Spearman};
  double worst = 0;
  for (int i = 0; i < 200; ++i) {
    const auto na = static_cast<Eigen::Index>(1 + rng.below(20));
    const auto nb = static_cast<Eigen::Index>(1 + rng.below(20));
    const auto dim = static_cast<Eigen::Index>(2 + rng.below(9));
    const Eigen::MatrixXd a = oracle::gaussian(na, dim, rng);
    const Eigen::MatrixXd b = oracle::gaussian(nb, dim, rng);
    const int k = i % 3;
    const double got = apd(a, b, {kinds[k], {}, 0}).value;
    worst = std::max(worst, std::abs(got - oracle::apd(a, b, k)));
  }
  const double secs = seconds_since(t0);
  const std::string d = "200 instances, max |diff| " + num(worst) + ", " + num(secs) + " s";
  return worst <= 1e-12 && secs < 10 ? pass(d) : fail(d);
}

Outcome rank_statistics() {
  Rng rng(202);
  bool exact = true;
  for (int i = 0; i < 50; ++i) {
    const std::size_t n = 2 + rng.below(29);
    std::vector<double> a(n), up(n), down(n);
    for (std::size_t j = 0; j < n; ++j) {
      a[j] = rng.normal();
      up[j] = std::exp(a[j]) + 3.0;
      down[j] = -a[j] * a[j] * a[j];
    }
    exact = exact && spearman_rank_correlation(a, up) == 1.0 &&
            spearman_rank_correlation(a, down) == -1.0;
  }
  double worst = 0;
  int done = 0;
  while (done < 100) {
    const std::size_t n = 2 + rng.below(29);
    const std::uint64_t levels = 2 + rng.below(5);
    std::vector<double> a(n), b(n);
    for (std::size_t j = 0; j < n; ++j) {
      a[j] = static_cast<double>(rng.below(levels));
      b[j] = static_cast<double>(rng.below(levels));
    }
    auto constant = [](const std::vector<double>& v) {
      return std::all_of(v.begin(), v.end(), [&](double x) { return x == v[0]; });
    };
    if (constant(a) || constant(b)) continue;
    worst = std::max(worst, std::abs(spearman_rank_correlation(a, b) - oracle::spearman(a, b)));
    ++done;
  }
  const std::string d = std::string("monotone/reversed exact: ") + (exact ? "yes" : "no") +
                        "; 100 tied instances, max |diff| " + num(worst);
  return exact && worst <= 1e-12 ? pass(d) : fail(d);
}

// Inputs lie on a 12-dimensional subspace of R^768, so 500 points pin down
// the map on the region the test points come from.
struct RecoveryData {
  TrainingSet train;
  TrainingSet test;
};

RecoveryData recovery_data() {
  Rng rng(7);
  const int d = 768, out = 65, r = 12;
  const Eigen::MatrixXd basis = oracle::gaussian(d, r, rng, 1.0 / std::sqrt(double(r)));
  const Eigen::MatrixXd w0 = oracle::gaussian(out, d, rng, 1.0 / std::sqrt(double(d)));
  Eigen::VectorXd b0(out);
  for (int i = 0; i < out; ++i) b0[i] = rng.uniform(-1, 1);
  auto draw = [&](int n) {
    TrainingSet s;
    s.inputs.resize(n, d);
    s.targets.resize(n, out);
    for (int k = 0; k < n; ++k) {
      const Eigen::VectorXd x = basis * oracle::gaussian(r, 1, rng);
      s.inputs.row(k) = x.transpose();
      const Eigen::VectorXd z = w0 * x + b0;
      for (int o = 0; o < out; ++o) s.targets(k, o) = 6.0 / (1.0 + std::exp(-z[o]));
    }
    return s;
  };
  RecoveryData data;
  data.train = draw(500);
  data.test = draw(100);
  return data;
}

struct TrainedPair {
  std::optional<RegressionModel> lt;
  std::optional<RegressionModel> mlp;
};

Outcome regression_recovery(TrainedPair& models) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto data = recovery_data();
  TrainConfig config;  // batch 16, lr 1e-3, 100 epochs
  config.seed = 1;
  const auto lt = train(data.train, config, ModelKind::Linear, &data.test);
  const auto mlp = train(data.train, config, ModelKind::Mlp, &data.test);
  const double lt_min = *std::min_element(lt.eval_mse.begin(), lt.eval_mse.end());
  const double mlp_min = *std::min_element(mlp.eval_mse.begin(), mlp.eval_mse.end());
  models.lt = lt.model;
  models.mlp = mlp.model;
  const double secs = seconds_since(t0);
  const std::string d = "min test MSE over epochs: LT " + num(lt_min) + ", MLP " + num(mlp_min) +
                        " (final LT " + num(lt.eval_mse.back()) + ", MLP " +
                        num(mlp.eval_mse.back()) + "), " + num(secs) + " s";
  return lt_min < 0.01 && mlp_min < 0.05 && lt_min <= mlp_min && secs < 300 ? pass(d) : fail(d);
}

Outcome gradient_check() {
  double worst = 0;
  for (std::uint64_t draw = 0; draw < 20; ++draw) {
    auto p = testing::tiny_problem(5000 + draw);
    worst = std::max(worst, testing::gradient_check(p.model, p.x, p.y).worst_relative);
  }
  const std::string d = "20 draws, worst relative error " + num(worst);
  return worst < 1e-4 ? pass(d) : fail(d);
}

Outcome output_range(const TrainedPair& models) {
  if (!models.lt || !models.mlp) return fail("no trained models available");
  Rng rng(303);
  std::size_t bad = 0;
  double lo = 6, hi = 0;
  for (int i = 0; i < 1000; ++i) {
    // Mix ordinary inputs with extreme magnitudes that saturate the head.
    const double scale = i % 4 == 3 ? 1e6 : 1.0 + i % 3;
    const Eigen::VectorXd x = oracle::gaussian(768, 1, rng, scale);
    for (const auto* m : {&*models.lt, &*models.mlp}) {
      const auto y = m->predict(x);
      bad += static_cast<std::size_t>(((y.array() <= 0.0) || (y.array() >= 6.0)).count());
      lo = std::min(lo, y.minCoeff());
      hi = std::max(hi, y.maxCoeff());
    }
  }
  const std::string d = "1000 inputs x {LT, MLP}, outputs in [" + num(lo) + ", " + num(hi) +
                        "], violations " + std::to_string(bad);
  return bad == 0 ? pass(d) : fail(d);
}

Outcome sparse_pca_monotone() {
  Rng rng(404);
  std::size_t bad_fits = 0;
  double worst_rise = 0;
  for (int t = 0; t < 50; ++t) {
    const auto m = static_cast<Eigen::Index>(20 + rng.below(60));
    const Eigen::MatrixXd x = oracle::gaussian(m, 65, rng);
    SparsePcaOptions o;
    o.alpha = alpha_upper_bound(x) * rng.uniform(0.001, 0.3);
    o.seed = static_cast<std::uint64_t>(t);
    const auto model = sparse_pca_fit(x, o);
    bool ok = true;
    for (std::size_t i = 1; i < model.objective_trace.size(); ++i) {
      const double rise = model.objective_trace[i] - model.objective_trace[i - 1];
      worst_rise = std::max(worst_rise, rise);
      if (rise > 1e-9) ok = false;
    }
    if (!ok) ++bad_fits;
  }
  const std::string d = "50 fits, largest rise " + num(worst_rise) + ", non-monotone fits " +
                        std::to_string(bad_fits);
  return bad_fits == 0 ? pass(d) : fail(d);
}

Outcome sparse_pca_planted() {
  Rng rng(505);
  const auto planted = oracle::planted_sparse(10, 65, 500, 0.01, rng);
  SparsePcaOptions o;
  o.alpha = 0.5;
  o.seed = 3;
  const auto model = sparse_pca_fit(planted.data, o);
  const auto cos = oracle::match_components(planted.loadings, model.components);
  const auto good = std::count_if(cos.begin(), cos.end(), [](double c) { return c >= 0.9; });
  const double low = *std::min_element(cos.begin(), cos.end());
  const std::string d = std::to_string(good) + "/10 components with |cos| >= 0.9 (lowest " +
                        num(low) + ")";
  return good >= 8 ? pass(d) : fail(d);
}

Outcome sparse_pca_zero_alpha() {
  Rng rng(606);
  double worst = 0;
  for (const auto rows : {40, 100}) {
    const Eigen::MatrixXd x = oracle::gaussian(rows, 65, rng) * oracle::gaussian(65, 65, rng, 0.3);
    SparsePcaOptions o;
    o.alpha = 0;
    o.n_components = static_cast<std::size_t>(std::min(rows, 65));
    o.tolerance = 1e-14;
    o.max_iterations = 5000;
    const auto model = sparse_pca_fit(x, o);
    const double ref = oracle::pca_residual(x, static_cast<int>(o.n_components));
    const double scale = (x.rowwise() - x.colwise().mean()).squaredNorm();
    worst = std::max(worst, std::abs(model.reconstruction_error - ref) / scale);
  }
  const std::string d = "m in {40, 100}, relative gap " + num(worst);
  return worst <= 1e-6 ? pass(d) : fail(d);
}

Outcome kmeans_planted() {
  Rng rng(707);
  std::string d;
  bool ok = true;
  double worst = 0;
  for (std::size_t k : {2u, 3u}) {
    const auto blobs = oracle::blobs(k, 40, 10, rng);
    const auto model = kmeans_fit(blobs.points, {k, 11, 10, 300});
    const bool exact = oracle::same_partition(model.labels, blobs.labels);
    const auto sel = select_k(blobs.points, 2, 10, 12, 10);
    double brute = 0;
    for (Eigen::Index i = 0; i < blobs.points.rows(); ++i) {
      const auto c = static_cast<Eigen::Index>(model.labels[static_cast<std::size_t>(i)]);
      for (Eigen::Index j = 0; j < blobs.points.cols(); ++j) {
        const double diff = blobs.points(i, j) - model.centroids(c, j);
        brute += diff * diff;
      }
    }
    worst = std::max(worst, std::abs(brute - model.inertia));
    ok = ok && exact && sel.k == k;
    d += "k=" + std::to_string(k) + ": partition " + (exact ? "exact" : "wrong") +
         ", select_k " + std::to_string(sel.k) + "; ";
  }
  d += "inertia gap " + num(worst);
  return ok && worst <= 1e-9 ? pass(d) : fail(d);
}

Outcome lsc_properties() {
  Rng rng(808);
  std::size_t asym = 0;
  for (int i = 0; i < 100; ++i) {
    UsageSet a{"w", "t1", oracle::gaussian(1 + rng.below(8), 65, rng), {}};
    UsageSet b{"w", "t2", oracle::gaussian(1 + rng.below(8), 65, rng), {}};
    const auto ab = lsc_vector(a, b).values;
    const auto ba = lsc_vector(b, a).values;
    if (!(ab.array() == -ba.array()).all()) ++asym;
  }
  const auto sets = valence_sets(FeatureIndex(canonical_feature_names()));
  std::size_t mismatch = 0;
  for (int i = 0; i < 100; ++i) {
    LscVector v{"w", "t1", "t2", Eigen::VectorXd(65)};
    for (Eigen::Index j = 0; j < 65; ++j) v.values[j] = rng.uniform(-5.99, 5.99);
    for (auto pol : {Polarity::Positive, Polarity::Negative}) {
      const auto& idx = pol == Polarity::Positive ? sets.positive : sets.negative;
      double best = -std::numeric_limits<double>::infinity();
      for (auto j : idx) best = std::max(best, v.values[static_cast<Eigen::Index>(j)]);
      if (lsc_score(v, sets, pol) != best) ++mismatch;
    }
  }
  const std::string d = "antisymmetry failures " + std::to_string(asym) +
                        "/100, score mismatches " + std::to_string(mismatch) + "/200";
  return asym == 0 && mismatch == 0 ? pass(d) : fail(d);
}

// Synthetic inputs for a full CLI pipeline run.
void write_fixtures(const fs::path& dir) {
  Rng rng(909);
  const auto& names = canonical_feature_names();
  std::string lex = "word,pos";
  for (const auto& n : names) lex += "," + n;
  lex += "\n";
  std::vector<std::string> lex_words;
  for (int i = 0; i < 60; ++i) {
    const std::string w = "word" + std::to_string(100 + i);
    lex_words.push_back(w);
    lex += w + (i % 3 ? ",noun" : ",verb");
    for (std::size_t j = 0; j < names.size(); ++j) lex += "," + text::format_fixed(rng.uniform(0, 6), 2);
    lex += "\n";
  }
  text::write_file(dir / "lexicon.csv", lex);

  const std::size_t dim = 16;
  EmbeddingArchive archive(dim, {"synthetic-encoder", "synthetic-corpus"});
  int next_id = 0;
  auto emit = [&](const std::string& word, const std::string& period, const Eigen::VectorXd& center,
                  int count, double spread) {
    for (int c = 0; c < count; ++c) {
      UsageRecord r{word, period, "s" + std::to_string(next_id++) + ":2", {}};
      for (std::size_t j = 0; j < dim; ++j) {
        r.vector.push_back(static_cast<float>(center[static_cast<Eigen::Index>(j)] + spread * rng.normal()));
      }
      archive.add(std::move(r));
    }
  };
  for (const auto& w : lex_words) {
    const Eigen::VectorXd c = oracle::gaussian(dim, 1, rng);
    emit(w, "1910s", c, 3, 0.3);
    emit(w, "1990s", c + oracle::gaussian(dim, 1, rng, 0.5), 4, 0.3);
  }
  for (const std::string w : {"plane", "record", "bluegrass", "gay", "tape"}) {
    const Eigen::VectorXd old_sense = oracle::gaussian(dim, 1, rng, 3.0);
    const Eigen::VectorXd new_sense = oracle::gaussian(dim, 1, rng, 3.0);
    emit(w, "1910s", old_sense, 12, 0.2);
    emit(w, "1990s", old_sense, 4, 0.2);
    emit(w, "1990s", new_sense, 10, 0.2);
  }
  write_archive(archive, dir / "encoder.semb", ArchiveFormat::Packed);

  text::write_file(dir / "gold.tsv", "bluegrass\t0.8\ngay\t0.9\nplane\t0.6\nrecord\t0.4\ntape\t0.3\n");
  text::write_file(dir / "targets.txt", "bluegrass\ngay\nplane\nrecord\ntape\n");
  text::write_file(dir / "lemmas.tsv",
                   "plane\t5\nox\t3\nzyzzyva\t2\nrecord\t9\nice_cream\t2\ngaiety\t1\nbluegrass\t2\n");
  text::write_file(dir / "vocab.txt", "plane\nox\nrecord\nice_cream\ngaiety\nbluegrass\n");
}

std::string quote(const std::string& s) { return "'" + s + "'"; }

// Every run executes from its own directory with relative paths, so both
// runs see byte-identical arguments.
std::vector<std::string> pipeline_commands(const std::string& cli) {
  const std::string c = quote(cli) + " --seed 17 ";
  const std::string i = "../in/";
  const std::string o = "";
  return {
      c + "train --lexicon " + i + "lexicon.csv --archive " + i + "encoder.semb --model lt --epochs 30 --out " + o + "model.bin --report " + o + "train.tsv",
      c + "train --lexicon " + i + "lexicon.csv --archive " + i + "encoder.semb --model mlp --epochs 3 --out " + o + "mlp.bin --report " + o + "train_mlp.tsv",
      c + "cross-validate --lexicon " + i + "lexicon.csv --archive " + i + "encoder.semb --model lt --epochs 5 --folds 5 --out " + o + "cv.tsv",
      c + "map --model " + o + "model.bin --in " + i + "encoder.semb --out " + o + "binder.semb",
      c + "--format jsonl map --model " + o + "model.bin --in " + i + "encoder.semb --out " + o + "binder.txt",
      c + "apd --from " + o + "binder.semb --to " + o + "binder.semb --from-period 1910s --to-period 1990s --distance cosine --out " + o + "apd_cosine.tsv",
      c + "apd --from " + o + "binder.semb --to " + o + "binder.semb --from-period 1910s --to-period 1990s --distance spearman --sample-cap 20 --words " + i + "targets.txt --out " + o + "apd_sampled.tsv",
      c + "lsc-vectors --from " + o + "binder.semb --to " + o + "binder.semb --from-period 1910s --to-period 1990s --lexicon " + i + "lexicon.csv --out " + o + "lsc.tsv",
      c + "score-valence --vectors " + o + "lsc.tsv --polarity neg --out " + o + "valence.tsv",
      c + "sparse-pca --vectors " + o + "lsc.tsv --top-n 50 --components 10 --out-dir " + o + "spca",
      c + "cluster-usages --archive " + i + "encoder.semb --word bluegrass --k-max 5 --out-dir " + o + "clusters",
      c + "eval --gold " + i + "gold.tsv --pred " + o + "apd_cosine.tsv --out " + o + "eval.txt",
      c + "select-targets --lemmas " + i + "lemmas.tsv --vocab " + i + "vocab.txt --out " + o + "targets.txt",
  };
}

Outcome cli_determinism(const std::string& cli) {
  if (cli.empty() || !fs::exists(cli)) return fail("lscb binary not found: '" + cli + "'");
  const fs::path root = fs::temp_directory_path() / "binderlsc_acceptance_cli";
  fs::remove_all(root);
  fs::create_directories(root / "in");
  write_fixtures(root / "in");
  std::size_t commands = 0;
  for (const auto* run : {"run1", "run2"}) {
    fs::create_directories(root / run);
    for (const auto& cmd : pipeline_commands(cli)) {
      const std::string full = "cd " + quote((root / run).string()) + " && " + cmd +
                               " > /dev/null 2>> ../" + run + ".stderr";
      if (std::system(full.c_str()) != 0) return fail("command failed: " + cmd);
      ++commands;
    }
  }
  std::size_t files = 0;
  for (const auto& entry : fs::recursive_directory_iterator(root / "run1")) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), root / "run1");
    const auto twin = root / "run2" / rel;
    if (!fs::exists(twin) || text::read_file(entry.path()) != text::read_file(twin)) {
      return fail("outputs differ: " + rel.string());
    }
    ++files;
  }
  // Mapped vectors stay inside (0, 6) after float32 storage.
  const auto mapped = read_archive(root / "run1" / "binder.semb", ArchiveFormat::Packed);
  for (const auto& r : mapped.records()) {
    for (float v : r.vector) {
      if (!(v > 0.0f && v < 6.0f)) return fail("mapped value out of range: " + num(v));
    }
  }
  return pass(std::to_string(commands / 2) + " commands run twice, " + std::to_string(files) +
              " output files byte-identical");
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? fs::absolute(argv[1]).string() : "";
  TrainedPair models;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"apd-oracle-equivalence", apd_oracle},
      {"rank-statistics", rank_statistics},
      {"regression-recovery", [&] { return regression_recovery(models); }},
      {"gradient-check", gradient_check},
      {"output-range", [&] { return output_range(models); }},
      {"sparse-pca-monotone-objective", sparse_pca_monotone},
      {"sparse-pca-planted-recovery", sparse_pca_planted},
      {"sparse-pca-zero-alpha-matches-pca", sparse_pca_zero_alpha},
      {"kmeans-planted-clusters", kmeans_planted},
      {"lsc-vector-and-score", lsc_properties},
      {"cli-determinism", [&] { return cli_determinism(cli); }},
      {"full-scale-reference-data",
       [] { return Outcome{Outcome::Skip, "needs the licensed corpora and extracted embeddings"}; }},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome r;
    try {
      r = check();
    } catch (const std::exception& e) {
      r = fail(std::string("exception: ") + e.what());
    }
    const char* tag = r.kind == Outcome::Pass ? "PASS" : r.kind == Outcome::Fail ? "FAIL" : "SKIP";
    if (r.kind == Outcome::Fail) ++failures;
    std::cout << tag << " " << name << ": " << r.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
