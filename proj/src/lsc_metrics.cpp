#include "binderlsc/lsc_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "binderlsc/error.hpp"
#include "binderlsc/eval.hpp"
#include "binderlsc/rng.hpp"

namespace binderlsc {

std::string to_string(DistanceKind kind) {
  switch (kind) {
    case DistanceKind::Euclidean: return "euclid";
    case DistanceKind::Cosine: return "cosine";
    case DistanceKind::Spearman: return "spearman";
  }
  return "?";
}

DistanceKind parse_distance_kind(const std::string& name) {
  if (name == "euclid" || name == "euclidean") return DistanceKind::Euclidean;
  if (name == "cosine") return DistanceKind::Cosine;
  if (name == "spearman") return DistanceKind::Spearman;
  throw Error(ErrorCode::Config, "unknown distance '" + name + "' (euclid, cosine, spearman)");
}

namespace {

double distance_rows(DistanceKind kind, const Eigen::MatrixXd& a, Eigen::Index i,
                     const Eigen::MatrixXd& b, Eigen::Index j) {
  switch (kind) {
    case DistanceKind::Euclidean: {
      double s = 0.0;
      for (Eigen::Index c = 0; c < a.cols(); ++c) {
        const double d = a(i, c) - b(j, c);
        s += d * d;
      }
      return std::sqrt(s);
    }
    case DistanceKind::Cosine: {
      double dot = 0.0, na = 0.0, nb = 0.0;
      for (Eigen::Index c = 0; c < a.cols(); ++c) {
        dot += a(i, c) * b(j, c);
        na += a(i, c) * a(i, c);
        nb += b(j, c) * b(j, c);
      }
      if (na == 0.0 || nb == 0.0) {
        throw Error(ErrorCode::UndefinedDistance, "cosine distance of a zero vector");
      }
      return 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
    }
    case DistanceKind::Spearman: {
      if (a.cols() < 2) {
        throw Error(ErrorCode::UndefinedDistance, "spearman distance needs length >= 2");
      }
      const Eigen::VectorXd u = a.row(i).transpose();
      const Eigen::VectorXd v = b.row(j).transpose();
      try {
        return 1.0 - spearman_rank_correlation({u.data(), static_cast<std::size_t>(u.size())},
                                               {v.data(), static_cast<std::size_t>(v.size())});
      } catch (const Error& e) {
        if (e.code() != ErrorCode::UndefinedCorrelation) throw;
        throw Error(ErrorCode::UndefinedDistance, std::string("spearman distance: ") + e.what());
      }
    }
  }
  return 0.0;
}

void check_same_width(Eigen::Index a, Eigen::Index b) {
  if (a != b) {
    throw Error(ErrorCode::Shape, "dimension mismatch: " + std::to_string(a) + " vs " +
                                      std::to_string(b));
  }
}

}  // namespace

double distance(DistanceKind kind, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  check_same_width(u.size(), v.size());
  const Eigen::MatrixXd a = u.transpose();
  const Eigen::MatrixXd b = v.transpose();
  return distance_rows(kind, a, 0, b, 0);
}

ApdResult apd(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const ApdOptions& options) {
  if (a.rows() == 0 || b.rows() == 0) throw Error(ErrorCode::EmptyUsage, "apd: empty usage set");
  check_same_width(a.cols(), b.cols());
  const auto na = static_cast<std::uint64_t>(a.rows());
  const auto nb = static_cast<std::uint64_t>(b.rows());
  const std::uint64_t total = na * nb;

  ApdResult result;
  double sum = 0.0;
  if (options.sample_cap && *options.sample_cap == 0) {
    throw Error(ErrorCode::Validation, "apd: sample cap must be positive");
  }
  if (options.sample_cap && total > *options.sample_cap) {
    // Floyd's algorithm: cap distinct pair indices out of total.
    const std::uint64_t cap = *options.sample_cap;
    Rng rng(derive_seed(options.seed, "apd-sampling"));
    std::unordered_set<std::uint64_t> chosen;
    chosen.reserve(static_cast<std::size_t>(cap));
    for (std::uint64_t j = total - cap; j < total; ++j) {
      const std::uint64_t t = rng.below(j + 1);
      if (!chosen.insert(t).second) chosen.insert(j);
    }
    std::vector<std::uint64_t> pairs(chosen.begin(), chosen.end());
    std::sort(pairs.begin(), pairs.end());
    for (auto p : pairs) {
      sum += distance_rows(options.kind, a, static_cast<Eigen::Index>(p / nb), b,
                           static_cast<Eigen::Index>(p % nb));
    }
    result.pairs_used = cap;
    result.sampled = true;
  } else {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      for (Eigen::Index j = 0; j < b.rows(); ++j) sum += distance_rows(options.kind, a, i, b, j);
    }
    result.pairs_used = total;
  }
  result.value = sum / static_cast<double>(result.pairs_used);
  return result;
}

Eigen::VectorXd lsc_difference(const Eigen::MatrixXd& from, const Eigen::MatrixXd& to) {
  if (from.rows() == 0 || to.rows() == 0) {
    throw Error(ErrorCode::EmptyUsage, "lsc vector: empty usage set");
  }
  check_same_width(from.cols(), to.cols());
  return mean_rows(to) - mean_rows(from);
}

LscVector lsc_vector(const UsageSet& from, const UsageSet& to) {
  return {to.word.empty() ? from.word : to.word, from.period, to.period,
          lsc_difference(from.vectors, to.vectors)};
}

std::string to_string(Polarity polarity) {
  return polarity == Polarity::Positive ? "pos" : "neg";
}

Polarity parse_polarity(const std::string& name) {
  if (name == "pos" || name == "positive") return Polarity::Positive;
  if (name == "neg" || name == "negative") return Polarity::Negative;
  throw Error(ErrorCode::Config, "unknown polarity '" + name + "' (pos, neg)");
}

double lsc_score(const LscVector& v, const ValenceFeatureSets& sets, Polarity polarity) {
  const auto& idx = polarity == Polarity::Positive ? sets.positive : sets.negative;
  if (idx.empty()) throw Error(ErrorCode::Config, "empty valence feature set");
  double best = -std::numeric_limits<double>::infinity();
  for (auto i : idx) {
    if (static_cast<Eigen::Index>(i) >= v.values.size()) {
      throw Error(ErrorCode::Shape, "valence index outside the LSC vector");
    }
    best = std::max(best, v.values[static_cast<Eigen::Index>(i)]);
  }
  return best;
}

std::vector<LscVector> rank_by_norm(std::vector<LscVector> vectors, std::size_t top_n) {
  if (top_n > vectors.size()) {
    throw Error(ErrorCode::Range, "top_n " + std::to_string(top_n) + " exceeds " +
                                      std::to_string(vectors.size()) + " vectors");
  }
  std::vector<std::pair<double, std::size_t>> keyed;
  keyed.reserve(vectors.size());
  for (std::size_t i = 0; i < vectors.size(); ++i) keyed.emplace_back(vectors[i].values.norm(), i);
  std::sort(keyed.begin(), keyed.end(), [&](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return vectors[x.second].word < vectors[y.second].word;
  });
  std::vector<LscVector> out;
  out.reserve(top_n);
  for (std::size_t i = 0; i < top_n; ++i) out.push_back(std::move(vectors[keyed[i].second]));
  return out;
}

std::vector<std::pair<std::string, double>> rank_by_lsc_score(const std::vector<LscVector>& vectors,
                                                              const ValenceFeatureSets& sets,
                                                              Polarity polarity) {
  std::vector<std::pair<std::string, double>> out;
  out.reserve(vectors.size());
  for (const auto& v : vectors) out.emplace_back(v.word, lsc_score(v, sets, polarity));
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    return x.first < y.first;
  });
  return out;
}

}  // namespace binderlsc
