#include <doctest.h>

#include <set>

#include "binderlsc/lexicon.hpp"
#include "binderlsc/sparse_pca.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace binderlsc;

namespace {

void check_component_contract(const SparsePcaModel& m) {
  for (Eigen::Index k = 0; k < m.components.rows(); ++k) {
    const auto row = m.components.row(k);
    CHECK(row.norm() <= 1.0 + 1e-9);
    if (row.cwiseAbs().maxCoeff() > 0) {
      Eigen::Index arg;
      row.cwiseAbs().maxCoeff(&arg);
      CHECK(row[arg] > 0);
    }
  }
}

}  // namespace

TEST_CASE("single sparse direction is recovered") {
  Rng rng(1);
  Eigen::MatrixXd x = oracle::gaussian(60, 65, rng, 1e-3);
  for (Eigen::Index r = 0; r < 60; ++r) x(r, 3) += 2.0 * rng.normal();
  SparsePcaOptions o;
  o.alpha = 0.05;
  o.seed = 2;
  const auto m = sparse_pca_fit(x, o);
  check_component_contract(m);
  const auto first = m.components.row(0);
  Eigen::Index arg;
  first.cwiseAbs().maxCoeff(&arg);
  CHECK(arg == 3);
  CHECK(first[3] > 0.99);
  for (Eigen::Index k = 1; k < m.components.rows(); ++k) {
    CHECK(m.projections.col(k).norm() < 1e-2 * m.projections.col(0).norm());
  }
}

TEST_CASE("zero sparsity matches the PCA residual") {
  Rng rng(4);
  const Eigen::MatrixXd x = oracle::gaussian(30, 12, rng) * oracle::gaussian(12, 12, rng);
  for (int k : {3, 12}) {
    SparsePcaOptions o;
    o.alpha = 0;
    o.n_components = static_cast<std::size_t>(k);
    o.tolerance = 1e-13;
    o.max_iterations = 20000;
    const auto m = sparse_pca_fit(x, o);
    const double ref = oracle::pca_residual(x, k);
    const double scale = (x.rowwise() - x.colwise().mean()).squaredNorm();
    CHECK(std::abs(m.reconstruction_error - ref) <= 1e-6 * scale);
  }
}

TEST_CASE("huge alpha zeroes everything and reports a degenerate fit") {
  Rng rng(5);
  const Eigen::MatrixXd x = oracle::gaussian(20, 65, rng);
  SparsePcaOptions o;
  o.alpha = 10 * alpha_upper_bound(x);
  const auto m = sparse_pca_fit(x, o);
  CHECK(m.degenerate);
  CHECK(m.components.isZero(0.0));
  CHECK(m.zero_fraction() == 1.0);
  CHECK_FALSE(m.warnings.empty());
}

TEST_CASE("objective never increases") {
  Rng rng(6);
  for (int t = 0; t < 5; ++t) {
    const Eigen::MatrixXd x = oracle::gaussian(40, 65, rng);
    SparsePcaOptions o;
    o.alpha = 0.5 + t;
    o.seed = static_cast<std::uint64_t>(t);
    const auto m = sparse_pca_fit(x, o);
    REQUIRE(m.objective_trace.size() == m.iterations);
    for (std::size_t i = 1; i < m.objective_trace.size(); ++i) {
      CHECK(m.objective_trace[i] <= m.objective_trace[i - 1] + 1e-9);
    }
    check_component_contract(m);
  }
}

TEST_CASE("zero loadings grow with alpha") {
  Rng rng(7);
  const auto planted = oracle::planted_sparse(10, 65, 200, 0.3, rng);
  const double top = alpha_upper_bound(planted.data);
  std::size_t last = 0;
  for (double f : {0.001, 0.02, 0.2}) {
    SparsePcaOptions o;
    o.alpha = f * top;
    o.seed = 11;
    const auto m = sparse_pca_fit(planted.data, o);
    CHECK(m.zero_loadings() >= last);
    last = m.zero_loadings();
  }
}

TEST_CASE("planted factors and their top features") {
  Rng rng(8);
  const auto planted = oracle::planted_sparse(10, 65, 500, 0.01, rng);
  SparsePcaOptions o;
  o.alpha = 0.5;
  o.seed = 3;
  std::vector<std::string> labels;
  for (int i = 0; i < 500; ++i) labels.push_back("w" + std::to_string(i));
  const auto m = sparse_pca_fit(planted.data, o, labels);
  const auto cos = oracle::match_components(planted.loadings, m.components);
  CHECK(std::count_if(cos.begin(), cos.end(), [](double c) { return c >= 0.9; }) >= 8);

  // First fitted component carries the largest-variance planted factor.
  const FeatureIndex index(canonical_feature_names());
  const Eigen::RowVectorXd p0 = planted.loadings.row(0) *
                                (planted.loadings.row(0).dot(m.components.row(0)) < 0 ? -1 : 1);
  std::vector<std::size_t> expected;
  for (Eigen::Index j = 0; j < 65; ++j) {
    if (p0[j] > 0) expected.push_back(static_cast<std::size_t>(j));
  }
  std::sort(expected.begin(), expected.end(),
            [&](std::size_t a, std::size_t b) { return p0[static_cast<Eigen::Index>(a)] > p0[static_cast<Eigen::Index>(b)]; });
  const auto n = std::min<std::size_t>(3, expected.size());
  const auto top = top_features(m, 0, n, index);
  for (std::size_t i = 0; i < n; ++i) CHECK(top[i].first == index.name_at(expected[i]));
}

TEST_CASE("top features of an all-zero component follow index order") {
  SparsePcaModel m;
  m.components = Eigen::MatrixXd::Zero(2, 65);
  m.components(1, 10) = 0.2;
  const FeatureIndex index(canonical_feature_names());
  const auto z = top_features(m, 0, 3, index);
  CHECK(z[0] == std::pair<std::string, double>{"Vision", 0.0});
  CHECK(z[1].first == "Bright");
  CHECK(z[2].first == "Dark");
  const auto o = top_features(m, 1, 2, index);
  CHECK(o[0].first == "Slow");
  CHECK(o[1].first == "Vision");
  CHECK_ERROR(top_features(m, 2, 3, index), Range);
}

TEST_CASE("extreme words") {
  SparsePcaModel m;
  m.projections.resize(4, 1);
  m.projections << 2, 1, -1, 1;
  m.row_labels = {"a", "b", "c", "d"};
  const auto t = extreme_words(m, 0, 1, Extreme::Top);
  CHECK(t[0].first == "a");
  const auto b = extreme_words(m, 0, 2, Extreme::Bottom);
  CHECK(b[0].first == "c");
  CHECK(b[1].first == "b");
  CHECK_ERROR(extreme_words(m, 0, 5, Extreme::Top), Range);

  Rng rng(9);
  m.projections = oracle::gaussian(10, 1, rng);
  m.row_labels.clear();
  for (int i = 0; i < 10; ++i) m.row_labels.push_back("w" + std::to_string(i));
  std::set<std::string> seen;
  for (auto d : {Extreme::Top, Extreme::Bottom}) {
    for (const auto& [w, s] : extreme_words(m, 0, 5, d)) CHECK(seen.insert(w).second);
  }
  CHECK(seen.size() == 10);
}

TEST_CASE("alpha calibration reaches half zeros") {
  Rng rng(10);
  const auto planted = oracle::planted_sparse(10, 65, 120, 0.2, rng);
  SparsePcaOptions o;
  o.seed = 4;
  const auto cal = calibrate_alpha(planted.data, o);
  CHECK(cal.model.zero_fraction() >= 0.5);
  CHECK(cal.model.alpha == cal.alpha);
  REQUIRE_FALSE(cal.ladder.empty());
  CHECK(cal.ladder.back().first == cal.alpha);
  for (std::size_t i = 0; i + 1 < cal.ladder.size(); ++i) CHECK(cal.ladder[i].second < 0.5);
}

TEST_CASE("sparse pca preconditions and determinism") {
  Rng rng(11);
  const Eigen::MatrixXd x = oracle::gaussian(9, 65, rng);
  SparsePcaOptions o;
  CHECK_ERROR(sparse_pca_fit(x, o), InsufficientData);
  o.n_components = 3;
  o.alpha = -1;
  CHECK_ERROR(sparse_pca_fit(x, o), Validation);
  o.alpha = 0.3;
  const auto a = sparse_pca_fit(x, o), b = sparse_pca_fit(x, o);
  CHECK(a.components == b.components);
  CHECK(a.projections == b.projections);
  const Eigen::RowVectorXd mu = x.colwise().mean();
  CHECK((a.mean.transpose() - mu).cwiseAbs().maxCoeff() <= 1e-15);
}
