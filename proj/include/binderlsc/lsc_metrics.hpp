#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "binderlsc/embedding_store.hpp"
#include "binderlsc/lexicon.hpp"

namespace binderlsc {

enum class DistanceKind { Euclidean, Cosine, Spearman };

std::string to_string(DistanceKind kind);
// "euclid"/"euclidean", "cosine", "spearman"
DistanceKind parse_distance_kind(const std::string& name);

// Euclidean: |u - v|. Cosine: 1 - u.v / (|u||v|), Error(UndefinedDistance)
// for a zero vector. Spearman: 1 - rho over the dimensions, average ranks
// for ties, Error(UndefinedDistance) for length < 2 or a constant vector.
double distance(DistanceKind kind, const Eigen::VectorXd& u, const Eigen::VectorXd& v);

struct ApdOptions {
  DistanceKind kind = DistanceKind::Cosine;
  // When set and |A|*|B| exceeds it, average over this many distinct cross
  // pairs drawn without replacement.
  std::optional<std::uint64_t> sample_cap;
  std::uint64_t seed = 0;
};

struct ApdResult {
  double value = 0.0;
  std::uint64_t pairs_used = 0;
  bool sampled = false;
};

// Average pairwise distance over all cross pairs (rows of a x rows of b),
// summed in fixed row-major pair order.
ApdResult apd(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const ApdOptions& options);
inline ApdResult apd(const UsageSet& a, const UsageSet& b, const ApdOptions& options) {
  return apd(a.vectors, b.vectors, options);
}

struct LscVector {
  std::string word;
  std::string period_from;
  std::string period_to;
  Eigen::VectorXd values;  // mean(later) - mean(earlier), per feature
};

// mean(to) - mean(from). Throws Error(EmptyUsage) for an empty set and
// Error(Shape) for a dimension mismatch.
LscVector lsc_vector(const UsageSet& from, const UsageSet& to);
Eigen::VectorXd lsc_difference(const Eigen::MatrixXd& from, const Eigen::MatrixXd& to);

enum class Polarity { Positive, Negative };

std::string to_string(Polarity polarity);
Polarity parse_polarity(const std::string& name);

// Largest delta among the features of the chosen valence set. May be negative.
double lsc_score(const LscVector& v, const ValenceFeatureSets& sets, Polarity polarity);

// The top_n vectors by descending L2 norm, ties by word. Throws Error(Range)
// if top_n exceeds the input size.
std::vector<LscVector> rank_by_norm(std::vector<LscVector> vectors, std::size_t top_n);

// Every word with its score, descending, ties by word.
std::vector<std::pair<std::string, double>> rank_by_lsc_score(const std::vector<LscVector>& vectors,
                                                              const ValenceFeatureSets& sets,
                                                              Polarity polarity);

}  // namespace binderlsc
