#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "culture/parallel.hpp"
#include "culture/stat.hpp"

namespace culture::stat {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

double dtw(std::span<const double> a, std::span<const double> b,
           std::optional<std::size_t> window) {
  if (a.empty() || b.empty()) throw Error("dtw: empty series");
  const std::size_t n = a.size(), m = b.size();
  std::size_t w = window ? *window : std::max(n, m);
  w = std::max(w, n > m ? n - m : m - n);

  // prev/cur hold row i-1 and row i of the (n+1) x (m+1) table.
  std::vector<double> prev(m + 1, kInf), cur(m + 1, kInf);
  prev[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    std::fill(cur.begin(), cur.end(), kInf);
    const std::size_t lo = i > w ? i - w : 1;
    const std::size_t hi = std::min(m, i + w);
    for (std::size_t j = lo; j <= hi; ++j) {
      const double cost = std::abs(a[i - 1] - b[j - 1]);
      cur[j] = cost + std::min({prev[j], cur[j - 1], prev[j - 1]});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

Matrix pairwise(std::size_t n, const std::function<double(std::size_t, std::size_t)>& dist,
                std::size_t threads) {
  Matrix d(n);
  parallel_for(n, threads, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) d(i, j) = dist(i, j);
  });
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) d(j, i) = d(i, j);
  }
  return d;
}

// ---------------------------------------------------------------------------
// k-medoids (PAM)

namespace {

struct Nearest {
  std::vector<std::size_t> first;   // position in medoid list
  std::vector<double> d1;
  std::vector<double> d2;           // distance to second-nearest medoid
};

Nearest nearest_medoids(const Matrix& d, const std::vector<std::size_t>& medoids) {
  const std::size_t n = d.size();
  Nearest out{std::vector<std::size_t>(n, 0), std::vector<double>(n, kInf),
              std::vector<double>(n, kInf)};
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t c = 0; c < medoids.size(); ++c) {
      const double dist = d(j, medoids[c]);
      if (dist < out.d1[j]) {
        out.d2[j] = out.d1[j];
        out.d1[j] = dist;
        out.first[j] = c;
      } else if (dist < out.d2[j]) {
        out.d2[j] = dist;
      }
    }
  }
  return out;
}

}  // namespace

Clustering kmedoids(const Matrix& d, std::size_t k, std::uint64_t seed) {
  const std::size_t n = d.size();
  if (k == 0) throw Error("kmedoids: k must be at least 1");
  if (k > n) {
    throw Error("kmedoids: k = " + std::to_string(k) + " exceeds item count " + std::to_string(n));
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  // BUILD
  std::vector<std::size_t> medoids;
  std::vector<bool> is_medoid(n, false);
  std::vector<double> nearest(n, kInf);
  for (std::size_t step = 0; step < k; ++step) {
    double best_gain = -kInf;
    std::size_t best = n;
    for (auto i : order) {
      if (is_medoid[i]) continue;
      double gain = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double dj = std::isinf(nearest[j]) ? 0.0 : nearest[j];
        // First medoid: minimise total distance, expressed as a gain.
        gain += std::isinf(nearest[j]) ? -d(i, j) : std::max(0.0, dj - d(i, j));
      }
      if (gain > best_gain) {
        best_gain = gain;
        best = i;
      }
    }
    medoids.push_back(best);
    is_medoid[best] = true;
    for (std::size_t j = 0; j < n; ++j) nearest[j] = std::min(nearest[j], d(best, j));
  }

  Clustering out;
  auto total = [&](const Nearest& nm) { return std::accumulate(nm.d1.begin(), nm.d1.end(), 0.0); };
  Nearest nm = nearest_medoids(d, medoids);
  double cost = total(nm);
  out.cost_trace.push_back(cost);

  // SWAP: apply the single best improving swap per iteration.
  const double eps = 1e-12 * std::max(1.0, cost);
  for (int iter = 0; iter < 10000; ++iter) {
    double best_delta = -eps;
    std::size_t best_c = k, best_h = n;
    for (std::size_t c = 0; c < k; ++c) {
      for (auto h : order) {
        if (is_medoid[h]) continue;
        double delta = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          const double dh = d(j, h);
          if (nm.first[j] == c) {
            delta += std::min(dh, nm.d2[j]) - nm.d1[j];
          } else if (dh < nm.d1[j]) {
            delta += dh - nm.d1[j];
          }
        }
        if (delta < best_delta) {
          best_delta = delta;
          best_c = c;
          best_h = h;
        }
      }
    }
    if (best_c == k) break;
    is_medoid[medoids[best_c]] = false;
    medoids[best_c] = best_h;
    is_medoid[best_h] = true;
    nm = nearest_medoids(d, medoids);
    cost = total(nm);
    out.cost_trace.push_back(cost);
  }

  out.medoids = medoids;
  out.assignment.assign(n, 0);
  for (std::size_t j = 0; j < n; ++j) out.assignment[j] = nm.first[j];
  // A medoid always belongs to its own cluster, even when a duplicate medoid
  // sits at distance zero.
  for (std::size_t c = 0; c < k; ++c) out.assignment[medoids[c]] = c;
  out.cost = 0.0;
  for (std::size_t j = 0; j < n; ++j) out.cost += d(j, medoids[out.assignment[j]]);
  return out;
}

// ---------------------------------------------------------------------------
// k-means fallback

std::vector<double> resample(std::span<const double> series, std::size_t length) {
  if (series.empty() || length == 0) throw Error("resample: empty input");
  std::vector<double> out(length);
  if (series.size() == 1 || length == 1) {
    std::fill(out.begin(), out.end(), series[0]);
    return out;
  }
  const double scale = static_cast<double>(series.size() - 1) / static_cast<double>(length - 1);
  for (std::size_t i = 0; i < length; ++i) {
    const double x = static_cast<double>(i) * scale;
    const auto lo = static_cast<std::size_t>(std::floor(x));
    const auto hi = std::min(lo + 1, series.size() - 1);
    const double t = x - static_cast<double>(lo);
    out[i] = series[lo] * (1.0 - t) + series[hi] * t;
  }
  return out;
}

Clustering kmeans(std::span<const std::vector<double>> series, std::size_t k, std::uint64_t seed,
                  int max_iterations) {
  const std::size_t n = series.size();
  if (k == 0 || k > n) throw Error("kmeans: k must be in [1, n]");
  const std::size_t dim = series[0].size();
  for (const auto& s : series) {
    if (s.size() != dim) throw Error("kmeans: series must share one length");
  }
  auto sq = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < dim; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
  };

  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> centers;
  centers.push_back(series[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)]);
  std::vector<double> dmin(n, kInf);
  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dmin[i] = std::min(dmin[i], sq(series[i], centers.back()));
      total += dmin[i];
    }
    std::size_t pick = 0;
    if (total > 0) {
      double r = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (pick = 0; pick + 1 < n && r >= dmin[pick]; ++pick) r -= dmin[pick];
    }
    centers.push_back(series[pick]);
  }

  Clustering out;
  out.assignment.assign(n, 0);
  for (int iter = 0; iter < max_iterations; ++iter) {
    bool changed = iter == 0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double bd = kInf;
      for (std::size_t c = 0; c < k; ++c) {
        const double dd = sq(series[i], centers[c]);
        if (dd < bd) {
          bd = dd;
          best = c;
        }
      }
      if (out.assignment[i] != best) changed = true;
      out.assignment[i] = best;
    }
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[out.assignment[i]];
      for (std::size_t t = 0; t < dim; ++t) sums[out.assignment[i]][t] += series[i][t];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its centre
      for (std::size_t t = 0; t < dim; ++t) centers[c][t] = sums[c][t] / static_cast<double>(counts[c]);
    }
    double cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) cost += std::sqrt(sq(series[i], centers[out.assignment[i]]));
    out.cost_trace.push_back(cost);
    out.cost = cost;
    if (!changed) break;
  }
  // Representative item per cluster: the member closest to the centre.
  out.medoids.assign(k, 0);
  std::vector<double> best(k, kInf);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = out.assignment[i];
    const double dd = sq(series[i], centers[c]);
    if (dd < best[c]) {
      best[c] = dd;
      out.medoids[c] = i;
    }
  }
  return out;
}

}  // namespace culture::stat
