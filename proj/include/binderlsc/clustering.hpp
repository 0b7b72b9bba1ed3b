#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "binderlsc/embedding_store.hpp"

namespace binderlsc {

// Usage types: k-means over pooled contextual embeddings of one word.
struct ClusterModel {
  std::size_t k = 0;
  Eigen::MatrixXd centroids;               // k x d
  std::vector<std::size_t> labels;         // one per input row
  std::vector<std::string> occurrence_ids;  // parallel to labels, may be empty
  double inertia = 0.0;
  std::size_t iterations = 0;
  std::size_t best_restart = 0;
  bool converged = false;

  // occurrence_id -> cluster
  std::map<std::string, std::size_t> assignments() const;
};

struct KMeansOptions {
  std::size_t k = 2;
  std::uint64_t seed = 0;
  std::size_t restarts = 10;
  std::size_t max_iterations = 300;
};

// Lloyd's algorithm from k-means++ seeds, best of `restarts` runs by
// (inertia, restart index). Each label is the nearest centroid, ties to the
// lowest index; an empty cluster takes the point farthest from its centroid.
// Throws Error(InsufficientData) when rows < k. Duplicate occurrence ids are
// Error(Consistency).
ClusterModel kmeans_fit(const Eigen::MatrixXd& x, const KMeansOptions& options,
                        std::vector<std::string> occurrence_ids = {});

// Index of the nearest centroid, ties to the lowest index.
std::size_t nearest_centroid(const Eigen::MatrixXd& centroids, const Eigen::RowVectorXd& point);

// Sum of squared distances from each row to its labelled centroid.
double inertia(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centroids,
               const std::vector<std::size_t>& labels);

// Mean silhouette with Euclidean distance; singleton clusters score 0.
double mean_silhouette(const Eigen::MatrixXd& x, const std::vector<std::size_t>& labels,
                       std::size_t k);

struct KSelection {
  std::size_t k = 0;
  std::map<std::size_t, double> silhouettes;
  std::vector<std::string> warnings;
};

// k in [k_min, k_max] maximizing the mean silhouette, ties to the smaller k.
// All-identical rows return k_min with a warning.
KSelection select_k(const Eigen::MatrixXd& x, std::size_t k_min, std::size_t k_max,
                    std::uint64_t seed, std::size_t restarts = 10);

struct UsageTypeDistribution {
  std::string word;
  std::size_t k = 0;
  std::map<std::string, std::vector<double>> periods;  // period -> k proportions
  std::map<std::string, std::size_t> counts;           // period -> occurrences
};

// Per-period normalized histogram of cluster labels. Throws
// Error(Consistency) for an occurrence the model never assigned.
UsageTypeDistribution usage_distribution(const ClusterModel& model,
                                         const std::vector<UsageSet>& period_sets);

struct NearestExamples {
  std::vector<std::string> occurrence_ids;
  std::vector<double> distances;
  std::vector<std::string> warnings;
};

// Members of `cluster` closest to its centroid, ties by occurrence id.
NearestExamples nearest_examples(const ClusterModel& model, const Eigen::MatrixXd& x,
                                 const std::vector<std::string>& occurrence_ids,
                                 std::size_t cluster, std::size_t n = 5);

}  // namespace binderlsc
