#include "binderlsc/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "binderlsc/error.hpp"
#include "binderlsc/rng.hpp"

namespace binderlsc {

std::map<std::string, std::size_t> ClusterModel::assignments() const {
  std::map<std::string, std::size_t> out;
  for (std::size_t i = 0; i < occurrence_ids.size(); ++i) out.emplace(occurrence_ids[i], labels[i]);
  return out;
}

std::size_t nearest_centroid(const Eigen::MatrixXd& centroids, const Eigen::RowVectorXd& point) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
    const double d = (centroids.row(c) - point).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::size_t>(c);
    }
  }
  return best;
}

double inertia(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centroids,
               const std::vector<std::size_t>& labels) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    total += (x.row(i) - centroids.row(static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)])))
                 .squaredNorm();
  }
  return total;
}

namespace {

Eigen::MatrixXd plus_plus_seeds(const Eigen::MatrixXd& x, std::size_t k, Rng& rng) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd centers(static_cast<Eigen::Index>(k), x.cols());
  centers.row(0) = x.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
  Eigen::VectorXd d2(n);
  for (Eigen::Index i = 0; i < n; ++i) d2[i] = (x.row(i) - centers.row(0)).squaredNorm();
  for (std::size_t c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
    }
    centers.row(static_cast<Eigen::Index>(c)) = x.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (x.row(i) - centers.row(static_cast<Eigen::Index>(c))).squaredNorm());
    }
  }
  return centers;
}

struct LloydRun {
  Eigen::MatrixXd centroids;
  std::vector<std::size_t> labels;
  std::size_t iterations = 0;
  bool converged = false;
};

void assign(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centroids,
            std::vector<std::size_t>& labels) {
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    labels[static_cast<std::size_t>(i)] = nearest_centroid(centroids, x.row(i));
  }
}

// Means of each cluster; an empty cluster is re-seeded with the point
// farthest from its current centroid (taken from a cluster of size > 1).
void recenter(const Eigen::MatrixXd& x, std::vector<std::size_t>& labels,
              Eigen::MatrixXd& centroids) {
  const auto k = static_cast<std::size_t>(centroids.rows());
  std::vector<std::size_t> counts(k, 0);
  for (auto l : labels) ++counts[l];
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] != 0) continue;
    Eigen::Index far = -1;
    double far_d = -1.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const auto l = labels[static_cast<std::size_t>(i)];
      if (counts[l] < 2) continue;
      const double d = (x.row(i) - centroids.row(static_cast<Eigen::Index>(l))).squaredNorm();
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    if (far < 0) continue;
    --counts[labels[static_cast<std::size_t>(far)]];
    labels[static_cast<std::size_t>(far)] = c;
    counts[c] = 1;
  }
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(centroids.rows(), centroids.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    sums.row(static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)])) += x.row(i);
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] > 0) {
      centroids.row(static_cast<Eigen::Index>(c)) =
          sums.row(static_cast<Eigen::Index>(c)) / static_cast<double>(counts[c]);
    }
  }
}

LloydRun lloyd(const Eigen::MatrixXd& x, Eigen::MatrixXd centroids, std::size_t max_iterations) {
  LloydRun run;
  run.labels.assign(static_cast<std::size_t>(x.rows()), 0);
  assign(x, centroids, run.labels);
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    run.iterations = it;
    recenter(x, run.labels, centroids);
    std::vector<std::size_t> next(run.labels.size());
    assign(x, centroids, next);
    if (next == run.labels) {
      run.converged = true;
      break;
    }
    run.labels = std::move(next);
  }
  if (!run.converged) assign(x, centroids, run.labels);
  run.centroids = std::move(centroids);
  return run;
}

}  // namespace

ClusterModel kmeans_fit(const Eigen::MatrixXd& x, const KMeansOptions& options,
                        std::vector<std::string> occurrence_ids) {
  if (options.k == 0) throw Error(ErrorCode::Validation, "k must be >= 1");
  if (options.restarts == 0) throw Error(ErrorCode::Validation, "restarts must be >= 1");
  if (static_cast<std::size_t>(x.rows()) < options.k) {
    throw Error(ErrorCode::InsufficientData, std::to_string(x.rows()) + " points cannot form " +
                                                 std::to_string(options.k) + " clusters");
  }
  if (!x.allFinite()) throw Error(ErrorCode::Data, "k-means input has non-finite values");
  if (!occurrence_ids.empty()) {
    if (occurrence_ids.size() != static_cast<std::size_t>(x.rows())) {
      throw Error(ErrorCode::Shape, "occurrence id count does not match the data");
    }
    std::set<std::string> seen;
    for (const auto& id : occurrence_ids) {
      if (!seen.insert(id).second) {
        throw Error(ErrorCode::Consistency, "duplicate occurrence id '" + id + "'");
      }
    }
  }

  ClusterModel best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < options.restarts; ++r) {
    Rng rng(derive_seed(options.seed, "kmeans-restart-" + std::to_string(r)));
    auto run = lloyd(x, plus_plus_seeds(x, options.k, rng), options.max_iterations);
    const double value = inertia(x, run.centroids, run.labels);
    if (value < best.inertia) {
      best.k = options.k;
      best.centroids = std::move(run.centroids);
      best.labels = std::move(run.labels);
      best.inertia = value;
      best.iterations = run.iterations;
      best.best_restart = r;
      best.converged = run.converged;
    }
  }
  best.occurrence_ids = std::move(occurrence_ids);
  return best;
}

double mean_silhouette(const Eigen::MatrixXd& x, const std::vector<std::size_t>& labels,
                       std::size_t k) {
  const auto n = static_cast<std::size_t>(x.rows());
  std::vector<std::size_t> sizes(k, 0);
  for (auto l : labels) ++sizes[l];
  double total = 0.0;
  std::vector<double> sum_to(k);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(sum_to.begin(), sum_to.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      sum_to[labels[j]] += (x.row(static_cast<Eigen::Index>(i)) - x.row(static_cast<Eigen::Index>(j))).norm();
    }
    const std::size_t own = labels[i];
    if (sizes[own] < 2) continue;  // singleton: s(i) = 0
    const double a = sum_to[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c == own || sizes[c] == 0) continue;
      b = std::min(b, sum_to[c] / static_cast<double>(sizes[c]));
    }
    if (!std::isfinite(b)) continue;
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

KSelection select_k(const Eigen::MatrixXd& x, std::size_t k_min, std::size_t k_max,
                    std::uint64_t seed, std::size_t restarts) {
  if (k_min < 2 || k_min > k_max) {
    throw Error(ErrorCode::Validation, "k range must satisfy 2 <= k_min <= k_max");
  }
  if (static_cast<std::size_t>(x.rows()) < k_max) {
    throw Error(ErrorCode::InsufficientData, std::to_string(x.rows()) +
                                                 " points cannot be split into " +
                                                 std::to_string(k_max) + " clusters");
  }
  KSelection result;
  bool identical = true;
  for (Eigen::Index i = 1; i < x.rows() && identical; ++i) identical = x.row(i) == x.row(0);
  if (identical) {
    result.k = k_min;
    result.warnings.push_back("all points identical; silhouette undefined, using k=" +
                              std::to_string(k_min));
    return result;
  }
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = k_min; k <= k_max; ++k) {
    KMeansOptions opts{k, derive_seed(seed, "select-k-" + std::to_string(k)), restarts, 300};
    const auto model = kmeans_fit(x, opts);
    const double s = mean_silhouette(x, model.labels, k);
    result.silhouettes[k] = s;
    if (s > best) {
      best = s;
      result.k = k;
    }
  }
  return result;
}

UsageTypeDistribution usage_distribution(const ClusterModel& model,
                                         const std::vector<UsageSet>& period_sets) {
  const auto assigned = model.assignments();
  UsageTypeDistribution dist;
  dist.k = model.k;
  for (const auto& set : period_sets) {
    if (dist.word.empty()) dist.word = set.word;
    if (set.occurrence_ids.empty()) {
      throw Error(ErrorCode::EmptyUsage, "period '" + set.period + "' has no occurrences");
    }
    auto& hist = dist.periods[set.period];
    hist.assign(model.k, 0.0);
    std::vector<std::size_t> counts(model.k, 0);
    auto& n = dist.counts[set.period];
    n = 0;
    for (const auto& id : set.occurrence_ids) {
      const auto it = assigned.find(id);
      if (it == assigned.end()) {
        throw Error(ErrorCode::Consistency, "occurrence '" + id + "' has no cluster assignment");
      }
      ++counts[it->second];
      ++n;
    }
    for (std::size_t c = 0; c < model.k; ++c) {
      hist[c] = static_cast<double>(counts[c]) / static_cast<double>(n);
    }
  }
  return dist;
}

NearestExamples nearest_examples(const ClusterModel& model, const Eigen::MatrixXd& x,
                                 const std::vector<std::string>& occurrence_ids,
                                 std::size_t cluster, std::size_t n) {
  if (cluster >= model.k) {
    throw Error(ErrorCode::Range, "cluster " + std::to_string(cluster) + " out of range");
  }
  if (occurrence_ids.size() != static_cast<std::size_t>(x.rows()) ||
      model.labels.size() != occurrence_ids.size()) {
    throw Error(ErrorCode::Shape, "rows, ids and labels disagree in length");
  }
  std::vector<std::pair<double, std::size_t>> members;
  for (std::size_t i = 0; i < model.labels.size(); ++i) {
    if (model.labels[i] != cluster) continue;
    members.emplace_back(
        (x.row(static_cast<Eigen::Index>(i)) - model.centroids.row(static_cast<Eigen::Index>(cluster)))
            .norm(),
        i);
  }
  NearestExamples out;
  if (members.empty()) {
    out.warnings.push_back("cluster " + std::to_string(cluster) + " is empty");
    return out;
  }
  std::sort(members.begin(), members.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return occurrence_ids[a.second] < occurrence_ids[b.second];
  });
  for (std::size_t i = 0; i < std::min(n, members.size()); ++i) {
    out.occurrence_ids.push_back(occurrence_ids[members[i].second]);
    out.distances.push_back(members[i].first);
  }
  return out;
}

}  // namespace binderlsc
