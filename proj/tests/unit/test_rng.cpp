#include <doctest.h>

#include "binderlsc/rng.hpp"
#include "binderlsc/text.hpp"

using namespace binderlsc;

TEST_CASE("rng streams are reproducible and distinct") {
  Rng a(5), b(5), c(6);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
  }
  CHECK(derive_seed(1, "init") == derive_seed(1, "init"));
  CHECK(derive_seed(1, "init") != derive_seed(1, "shuffle"));
  CHECK(derive_seed(1, "init") != derive_seed(2, "init"));
}

TEST_CASE("rng ranges and moments") {
  Rng r(9);
  double sum = 0, sq = 0;
  std::vector<int> hist(7, 0);
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    CHECK_UNARY(u >= 0.0);
    CHECK_UNARY(u < 1.0);
    ++hist[r.below(7)];
    const double z = r.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sq / n - 1.0) < 0.02);
  for (int h : hist) CHECK(std::abs(h - n / 7.0) < 0.02 * n / 7.0);
}

TEST_CASE("text helpers") {
  CHECK(text::trim("  a b \t") == "a b");
  CHECK(text::split("a,,b", ',').size() == 3);
  CHECK(text::parse_double(" 2.5 ") == 2.5);
  CHECK(text::parse_double("+1e3") == 1000.0);
  CHECK_FALSE(text::parse_double("1.5x").has_value());
  CHECK_FALSE(text::parse_int("4.0").has_value());
  CHECK(text::format_double(0.1) == "0.1");
  CHECK(text::parse_double(text::format_double(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(text::format_fixed(0.6666, 3) == "0.667");
  CHECK(text::lines("a\r\nb\n").size() == 2);
}
