#include <doctest.h>

#include <vector>

#include "binderlsc/error.hpp"
#include "binderlsc/eval.hpp"
#include "binderlsc/rng.hpp"
#include "oracles.hpp"

using namespace binderlsc;

TEST_CASE("average ranks share ties") {
  const std::vector<double> v{10, 20, 20, 5};
  const auto r = average_ranks(v);
  CHECK(r == std::vector<double>{2, 3.5, 3.5, 1});
}

TEST_CASE("spearman extremes") {
  CHECK(spearman_rank_correlation(std::vector<double>{1, 2, 3}, std::vector<double>{4, 9, 16}) ==
        1.0);
  CHECK(spearman_rank_correlation(std::vector<double>{1, 2, 3}, std::vector<double>{3, 2, 1}) ==
        -1.0);
}

TEST_CASE("spearman with ties matches rank-then-pearson") {
  // a ranks: 1, 2.5, 2.5, 4; b ranks: 1, 3, 2, 4.
  // cov = (-1.5)(-1.5) + 0*0.5 + 0*(-0.5) + 1.5*1.5 = 4.5
  // var_a = 2.25 + 0 + 0 + 2.25 = 4.5, var_b = 2.25 + .25 + .25 + 2.25 = 5
  const double expected = 4.5 / std::sqrt(4.5 * 5.0);
  const std::vector<double> a{1, 2, 2, 4}, b{1, 3, 2, 4};
  CHECK(spearman_rank_correlation(a, b) == doctest::Approx(expected).epsilon(1e-15));
  CHECK(oracle::spearman(a, b) == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("spearman is symmetric and rejects degenerate input") {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> a(12), b(12);
    for (auto& x : a) x = static_cast<double>(rng.below(5));
    for (auto& x : b) x = rng.normal();
    if (std::all_of(a.begin(), a.end(), [&](double x) { return x == a[0]; })) continue;
    CHECK(spearman_rank_correlation(a, b) == spearman_rank_correlation(b, a));
  }
  CHECK_THROWS_AS(spearman_rank_correlation(std::vector<double>{1, 1, 1},
                                            std::vector<double>{1, 2, 3}),
                  Error);
  CHECK_THROWS_AS(spearman_rank_correlation(std::vector<double>{1}, std::vector<double>{1}), Error);
  CHECK_THROWS_AS(spearman_rank_correlation(std::vector<double>{1, 2}, std::vector<double>{1}),
                  Error);
}

TEST_CASE("evaluate identity, reversal and coverage") {
  const auto gold = parse_score_table("# gold\nplane\t0.8\nbit\t0.3\ngas\t0.1\nrecord\t0.5\n");
  CHECK(evaluate(gold, gold) == 1.0);
  ScoreTable neg;
  for (const auto& [w, s] : gold) neg[w] = -s;
  CHECK(evaluate(gold, neg) == -1.0);

  ScoreTable partial = gold;
  partial.erase("gas");
  try {
    evaluate(gold, partial);
    FAIL("expected coverage error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Coverage);
    CHECK(std::string(e.what()).find("gas") != std::string::npos);
  }
}

TEST_CASE("evaluate is invariant to increasing transforms") {
  Rng rng(5);
  ScoreTable gold, pred, transformed;
  for (int i = 0; i < 37; ++i) {
    const std::string w = "w" + std::to_string(i);
    gold[w] = rng.uniform();
    pred[w] = rng.normal();
    transformed[w] = std::exp(3.0 * pred[w]) + 7.0;
  }
  CHECK(evaluate(gold, pred) == evaluate(gold, transformed));
}

TEST_CASE("score table parse errors") {
  CHECK_THROWS_AS(parse_score_table("a\t1\na\t2\n"), Error);
  CHECK_THROWS_AS(parse_score_table("a 1\n"), Error);
  CHECK_THROWS_AS(parse_score_table("a\tx\n"), Error);
}
