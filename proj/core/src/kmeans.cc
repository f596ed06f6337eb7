// Copyright 2026 The ICU-Sepsis Engine Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <algorithm>
#include <limits>

#include "icu_sepsis/builder.h"
#include "icu_sepsis/errors.h"
#include "icu_sepsis/rng.h"

namespace icu_sepsis {
namespace {

double sq_dist(std::span<const double> x, std::span<const double> y) {
  double d = 0.0;
  for (size_t j = 0; j < x.size(); ++j) {
    const double t = x[j] - y[j];
    d += t * t;
  }
  return d;
}

DenseMatrix plus_plus_seed(const DenseMatrix& pts, int k, Rng& rng) {
  const int n = pts.rows;
  DenseMatrix c(k, pts.cols);
  std::vector<double> d2(static_cast<size_t>(n), std::numeric_limits<double>::max());
  int pick = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(n)));
  for (int j = 0; j < k; ++j) {
    std::copy(pts.row(pick).begin(), pts.row(pick).end(), c.row(j).begin());
    long double total = 0.0L;
    for (int i = 0; i < n; ++i) {
      d2[static_cast<size_t>(i)] = std::min(d2[static_cast<size_t>(i)],
                                            sq_dist(pts.row(i), c.row(j)));
      total += d2[static_cast<size_t>(i)];
    }
    if (j + 1 == k) break;
    if (total <= 0.0L) {
      pick = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(n)));
      continue;
    }
    // D^2 weighting.
    const long double u = static_cast<long double>(rng.uniform()) * total;
    long double run = 0.0L;
    pick = -1;
    for (int i = 0; i < n; ++i) {
      if (d2[static_cast<size_t>(i)] <= 0.0) continue;
      run += d2[static_cast<size_t>(i)];
      pick = i;
      if (u < run) break;
    }
  }
  return c;
}

}  // namespace

KMeansResult kmeans(const DenseMatrix& points, int k, uint64_t seed,
                    const KMeansOptions& options) {
  if (points.rows == 0 || points.cols == 0) throw DataError("no points to cluster");
  if (k < 1) throw UsageError("k must be at least 1");
  if (k > points.rows) {
    throw UsageError("k = " + std::to_string(k) + " exceeds the " +
                     std::to_string(points.rows) + " points");
  }
  Rng rng(seed);
  const int n = points.rows;
  const int dim = points.cols;
  KMeansResult r;
  r.centroids = plus_plus_seed(points, k, rng);
  r.labels.assign(static_cast<size_t>(n), -1);
  std::vector<double> dist(static_cast<size_t>(n));
  double previous = std::numeric_limits<double>::infinity();

  for (r.iterations = 1; r.iterations <= options.max_iterations; ++r.iterations) {
    bool moved = false;
    long double distortion = 0.0L;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int j = 0; j < k; ++j) {
        const double d = sq_dist(points.row(i), r.centroids.row(j));
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      moved = moved || r.labels[static_cast<size_t>(i)] != best;
      r.labels[static_cast<size_t>(i)] = best;
      dist[static_cast<size_t>(i)] = best_d;
      distortion += best_d;
    }
    r.distortion = static_cast<double>(distortion);

    std::vector<long double> sums(static_cast<size_t>(k) * dim, 0.0L);
    std::vector<int> sizes(static_cast<size_t>(k), 0);
    for (int i = 0; i < n; ++i) {
      const int j = r.labels[static_cast<size_t>(i)];
      ++sizes[static_cast<size_t>(j)];
      for (int d = 0; d < dim; ++d) {
        sums[static_cast<size_t>(j) * dim + d] += points(i, d);
      }
    }
    for (int j = 0; j < k; ++j) {
      if (sizes[static_cast<size_t>(j)] == 0) {
        auto far = std::max_element(dist.begin(), dist.end()) - dist.begin();
        std::copy(points.row(static_cast<int>(far)).begin(),
                  points.row(static_cast<int>(far)).end(), r.centroids.row(j).begin());
        dist[static_cast<size_t>(far)] = 0.0;
        moved = true;
        continue;
      }
      for (int d = 0; d < dim; ++d) {
        r.centroids(j, d) = static_cast<double>(
            sums[static_cast<size_t>(j) * dim + d] / sizes[static_cast<size_t>(j)]);
      }
    }
    if (!moved) break;
    if (previous < std::numeric_limits<double>::infinity() &&
        previous - r.distortion <= options.min_relative_improvement * previous) {
      break;
    }
    previous = r.distortion;
  }
  r.iterations = std::min(r.iterations, options.max_iterations);

  // Final assignment against the final centroids.
  long double distortion = 0.0L;
  for (int i = 0; i < n; ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int j = 0; j < k; ++j) {
      const double d = sq_dist(points.row(i), r.centroids.row(j));
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    r.labels[static_cast<size_t>(i)] = best;
    distortion += best_d;
  }
  r.distortion = static_cast<double>(distortion);
  return r;
}

ClusteredDataset kmeans_cluster(const FeatureTrajectoryDataset& features, int k,
                                uint64_t seed, const KMeansOptions& options) {
  size_t rows = 0;
  size_t dim = 0;
  for (const FeatureEpisode& e : features.episodes) {
    if (e.features.size() != e.actions.size()) {
      throw DataError("feature episode has mismatched features and actions");
    }
    if (e.features.empty()) throw DataError("empty feature episode");
    for (const auto& f : e.features) {
      if (dim == 0) dim = f.size();
      if (f.size() != dim || dim == 0) {
        throw DataError("feature vectors differ in dimensionality");
      }
    }
    rows += e.features.size();
  }
  DenseMatrix points(static_cast<int>(rows), static_cast<int>(dim));
  size_t r = 0;
  for (const FeatureEpisode& e : features.episodes) {
    for (const auto& f : e.features) {
      std::copy(f.begin(), f.end(), points.row(static_cast<int>(r++)).begin());
    }
  }
  ClusteredDataset out;
  out.fit = kmeans(points, k, seed, options);
  out.centroids = out.fit.centroids;
  r = 0;
  for (const FeatureEpisode& e : features.episodes) {
    Episode ep;
    ep.survived = e.survived;
    for (size_t t = 0; t < e.actions.size(); ++t) {
      const bool last = t + 1 == e.actions.size();
      ep.steps.push_back({out.fit.labels[r++], e.actions[t],
                          last && e.survived ? 1.0 : 0.0});
    }
    out.dataset.episodes.push_back(std::move(ep));
  }
  return out;
}

DenseMatrix centroid_table(const DenseMatrix& cluster_centroids,
                           const std::vector<StateId>& kept) {
  DenseMatrix t(static_cast<int>(kept.size()) + 3, cluster_centroids.cols);
  for (size_t i = 0; i < kept.size(); ++i) {
    const auto src = cluster_centroids.row(kept[i]);
    std::copy(src.begin(), src.end(), t.row(static_cast<int>(i)).begin());
  }
  return t;
}

}  // namespace icu_sepsis
