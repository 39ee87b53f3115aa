#include <algorithm>
#include <cmath>
#include <map>

#include "culture/stat.hpp"

namespace culture::stat {

namespace {

// log(1 + e^x) without overflow.
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double feature(std::int64_t a) { return std::log1p(static_cast<double>(a)); }

}  // namespace

std::vector<ExposureCell> aggregate_exposures(std::span<const std::int64_t> a_counts,
                                              std::span<const int> labels) {
  if (a_counts.size() != labels.size()) throw Error("logistic: series length mismatch");
  std::map<std::int64_t, ExposureCell> cells;
  for (std::size_t i = 0; i < a_counts.size(); ++i) {
    if (a_counts[i] < 0) throw Error("logistic: negative exposure count");
    if (labels[i] != 0 && labels[i] != 1) throw Error("logistic: labels must be 0 or 1");
    auto& c = cells[a_counts[i]];
    c.a = a_counts[i];
    ++c.trials;
    c.successes += labels[i];
  }
  std::vector<ExposureCell> out;
  out.reserve(cells.size());
  for (const auto& [_, c] : cells) out.push_back(c);
  return out;
}

double logistic_objective(std::span<const ExposureCell> cells, double alpha, double beta,
                          double ridge) {
  double ll = 0.0;
  for (const auto& c : cells) {
    const double eta = alpha * feature(c.a) + beta;
    ll += static_cast<double>(c.successes) * eta - static_cast<double>(c.trials) * softplus(eta);
  }
  return ll - 0.5 * ridge * (alpha * alpha + beta * beta);
}

std::array<double, 2> logistic_gradient(std::span<const ExposureCell> cells, double alpha,
                                        double beta, double ridge) {
  double ga = 0.0, gb = 0.0;
  for (const auto& c : cells) {
    const double x = feature(c.a);
    const double r = static_cast<double>(c.successes) -
                     static_cast<double>(c.trials) * sigmoid(alpha * x + beta);
    ga += r * x;
    gb += r;
  }
  return {ga - ridge * alpha, gb - ridge * beta};
}

LogisticFit fit_logistic(std::span<const ExposureCell> cells, const LogisticOptions& opts) {
  if (opts.ridge < 0) throw Error("logistic: ridge must be non-negative");
  std::int64_t n = 0;
  for (const auto& c : cells) n += c.trials;
  if (n < 2) throw Error("logistic: need at least 2 observations");

  // Gradient entries are sums over n rows, so the tolerance scales with n.
  const double tol = opts.gradient_tolerance * std::max<double>(1.0, static_cast<double>(n));
  LogisticFit fit;
  double alpha = 0.0, beta = 0.0;
  double obj = logistic_objective(cells, alpha, beta, opts.ridge);
  for (int it = 0; it < opts.max_iterations; ++it) {
    const auto g = logistic_gradient(cells, alpha, beta, opts.ridge);
    const double gnorm = std::hypot(g[0], g[1]);
    fit.gradient_norm = gnorm;
    fit.iterations = it;
    if (gnorm < tol) {
      fit.converged = true;
      break;
    }
    // Negative Hessian (positive definite thanks to the ridge).
    double haa = opts.ridge, hab = 0.0, hbb = opts.ridge;
    for (const auto& c : cells) {
      const double x = feature(c.a);
      const double p = sigmoid(alpha * x + beta);
      const double w = static_cast<double>(c.trials) * p * (1.0 - p);
      haa += w * x * x;
      hab += w * x;
      hbb += w;
    }
    const double det = haa * hbb - hab * hab;
    double da, db;
    if (det > 0 && std::isfinite(det)) {
      da = (hbb * g[0] - hab * g[1]) / det;
      db = (haa * g[1] - hab * g[0]) / det;
    } else {
      da = g[0] / std::max(haa, 1e-12);
      db = g[1] / std::max(hbb, 1e-12);
    }
    if (std::max(std::abs(da), std::abs(db)) < 1e-12 * (1.0 + std::max(std::abs(alpha), std::abs(beta)))) {
      fit.converged = true;
      fit.iterations = it;
      break;
    }
    // Step halving keeps the objective monotone.
    double step = 1.0;
    double next_obj = obj;
    bool moved = false;
    for (int h = 0; h < 50; ++h) {
      const double na = alpha + step * da, nb = beta + step * db;
      next_obj = logistic_objective(cells, na, nb, opts.ridge);
      if (std::isfinite(next_obj) && next_obj >= obj) {
        alpha = na;
        beta = nb;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) {
      fit.iterations = it + 1;
      break;
    }
    obj = next_obj;
    fit.iterations = it + 1;
  }
  if (!fit.converged) {
    const auto g = logistic_gradient(cells, alpha, beta, opts.ridge);
    fit.gradient_norm = std::hypot(g[0], g[1]);
    fit.converged = fit.gradient_norm < tol;
  }
  fit.alpha = alpha;
  fit.beta = beta;
  fit.log_likelihood = obj;
  return fit;
}

LogisticFit fit_logistic(std::span<const std::int64_t> a_counts, std::span<const int> labels,
                         const LogisticOptions& opts) {
  const auto cells = aggregate_exposures(a_counts, labels);
  return fit_logistic(cells, opts);
}

}  // namespace culture::stat
