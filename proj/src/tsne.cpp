// Exact t-SNE: Gaussian input affinities calibrated to a perplexity,
// Student-t output kernel, gradient descent with momentum, gains and early
// exaggeration.
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "culture/stat.hpp"

namespace culture::stat {

namespace {

constexpr double kFloor = 1e-12;

// Row of conditional probabilities p_{j|i} for a given precision beta.
// Returns the Shannon entropy (nats).
double conditional_row(std::span<const double> sq_dist, std::size_t self, double beta,
                       std::vector<double>& row) {
  double sum = 0.0;
  // Shift by the smallest off-diagonal distance for numerical stability.
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < sq_dist.size(); ++j) {
    if (j != self) dmin = std::min(dmin, sq_dist[j]);
  }
  for (std::size_t j = 0; j < sq_dist.size(); ++j) {
    row[j] = j == self ? 0.0 : std::exp(-beta * (sq_dist[j] - dmin));
    sum += row[j];
  }
  double h = 0.0;
  for (std::size_t j = 0; j < sq_dist.size(); ++j) {
    row[j] /= sum;
    if (row[j] > 0.0) h -= row[j] * std::log(row[j]);
  }
  return h;
}

}  // namespace

Matrix tsne_affinities(const Matrix& distances, double perplexity, double tol) {
  const std::size_t n = distances.size();
  const double target = std::log(perplexity);
  Matrix cond(n);
  std::vector<double> sq(n), row(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) sq[j] = distances(i, j) * distances(i, j);
    double beta = 1.0, lo = 0.0, hi = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 200; ++it) {
      const double h = conditional_row(sq, i, beta, row);
      const double diff = h - target;
      if (std::abs(diff) < tol) break;
      if (diff > 0) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
      } else {
        hi = beta;
        beta = 0.5 * (beta + lo);
      }
    }
    conditional_row(sq, i, beta, row);
    for (std::size_t j = 0; j < n; ++j) cond(i, j) = row[j];
  }
  Matrix p(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      p(i, j) = i == j ? 0.0 : std::max((cond(i, j) + cond(j, i)) / (2.0 * static_cast<double>(n)), kFloor);
    }
  }
  return p;
}

double tsne_kl(const Matrix& p, std::span<const std::array<double, 2>> y) {
  const std::size_t n = p.size();
  double z = 0.0;
  Matrix num(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double dx = y[i][0] - y[j][0], dy = y[i][1] - y[j][1];
      num(i, j) = 1.0 / (1.0 + dx * dx + dy * dy);
      z += num(i, j);
    }
  }
  double kl = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double q = std::max(num(i, j) / z, kFloor);
      kl += p(i, j) * std::log(p(i, j) / q);
    }
  }
  return kl;
}

TsneResult tsne(const Matrix& distances, const TsneOptions& opts) {
  const std::size_t n = distances.size();
  if (n < 2) throw Error("tsne: need at least 2 points");
  if (!distances.is_symmetric(1e-9)) throw Error("tsne: distance matrix is not symmetric");
  for (std::size_t i = 0; i < n; ++i) {
    if (distances(i, i) != 0.0) throw Error("tsne: distance matrix must have a zero diagonal");
  }
  if (!(opts.perplexity > 1.0 && opts.perplexity < static_cast<double>(n))) {
    throw Error("tsne: perplexity must lie in (1, n)");
  }

  const Matrix p = tsne_affinities(distances, opts.perplexity, opts.entropy_tolerance);
  const double rate = opts.learning_rate > 0.0
                          ? opts.learning_rate
                          : std::max(static_cast<double>(n) / std::max(opts.exaggeration, 1.0), 1.0);

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1e-4);
  std::vector<std::array<double, 2>> y(n);
  for (auto& pt : y) pt = {gauss(rng), gauss(rng)};

  TsneResult out;
  out.initial_kl = tsne_kl(p, y);

  std::vector<std::array<double, 2>> update(n, {0.0, 0.0}), gains(n, {1.0, 1.0}), grad(n);
  Matrix num(n);
  for (int iter = 0; iter < opts.iterations; ++iter) {
    const double exag = iter < opts.exaggeration_iterations ? opts.exaggeration : 1.0;
    const double momentum =
        iter < opts.momentum_switch_iteration ? opts.initial_momentum : opts.final_momentum;

    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double dx = y[i][0] - y[j][0], dy = y[i][1] - y[j][1];
        const double v = 1.0 / (1.0 + dx * dx + dy * dy);
        num(i, j) = num(j, i) = v;
        z += 2.0 * v;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      double gx = 0.0, gy = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double mult = (exag * p(i, j) - num(i, j) / z) * num(i, j);
        gx += mult * (y[i][0] - y[j][0]);
        gy += mult * (y[i][1] - y[j][1]);
      }
      grad[i] = {4.0 * gx, 4.0 * gy};
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (int d = 0; d < 2; ++d) {
        const bool same_sign = (grad[i][d] > 0) == (update[i][d] > 0);
        gains[i][d] = same_sign ? gains[i][d] * 0.8 : gains[i][d] + 0.2;
        gains[i][d] = std::max(gains[i][d], 0.01);
        update[i][d] = momentum * update[i][d] - rate * gains[i][d] * grad[i][d];
        y[i][d] += update[i][d];
      }
    }
    double cx = 0.0, cy = 0.0;
    for (const auto& pt : y) {
      cx += pt[0];
      cy += pt[1];
    }
    cx /= static_cast<double>(n);
    cy /= static_cast<double>(n);
    for (auto& pt : y) {
      pt[0] -= cx;
      pt[1] -= cy;
    }
  }
  out.final_kl = tsne_kl(p, y);
  out.coords = std::move(y);
  return out;
}

}  // namespace culture::stat
