// Numerical kernels: similarity measures, t-tests, logistic regression on
// ln(a+1), dynamic time warping, k-medoids and exact t-SNE.
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "culture/core.hpp"

namespace culture {

// Dense row-major square matrix.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

  std::size_t size() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * n_, n_}; }
  const std::vector<double>& data() const { return data_; }

  bool is_symmetric(double tol = 0.0) const;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

}  // namespace culture

namespace culture::stat {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double dof = 0.0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
};

enum class Alternative { TwoSided, Greater, Less };

double cosine(std::span<const double> x, std::span<const double> y);
double jaccard(const ConceptSet& a, const ConceptSet& b);

// Sample Pearson r (as statistic) with a t-transform p-value on n-2 dof.
TestResult pearson(std::span<const double> x, std::span<const double> y,
                   Alternative alt = Alternative::TwoSided);

TestResult one_sample_t(std::span<const double> data, double mu0,
                        Alternative alt = Alternative::TwoSided);
// Welch's unequal-variance test with Welch-Satterthwaite dof.
TestResult welch_t(std::span<const double> a, std::span<const double> b,
                   Alternative alt = Alternative::TwoSided);
// One-sample test on a[i] - b[i].
TestResult paired_t(std::span<const double> a, std::span<const double> b,
                    Alternative alt = Alternative::TwoSided);

double mean(std::span<const double> v);
// Sample standard deviation (n-1 denominator).
double sample_sd(std::span<const double> v);

// p-value of a t statistic.
double t_p_value(double t, double dof, Alternative alt);

// --- logistic regression: logit p = alpha * ln(a+1) + beta -----------------

struct LogisticFit {
  double alpha = 0.0;
  double beta = 0.0;
  double log_likelihood = 0.0;  // penalized
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
};

struct LogisticOptions {
  double ridge = 1e-6;  // applied to both alpha and beta
  int max_iterations = 100;
  double gradient_tolerance = 1e-8;  // per observation
};

// Rows sharing the same exposure count collapse into one cell.
struct ExposureCell {
  std::int64_t a = 0;
  std::int64_t trials = 0;
  std::int64_t successes = 0;
};

std::vector<ExposureCell> aggregate_exposures(std::span<const std::int64_t> a_counts,
                                              std::span<const int> labels);

LogisticFit fit_logistic(std::span<const std::int64_t> a_counts, std::span<const int> labels,
                         const LogisticOptions& opts = {});
LogisticFit fit_logistic(std::span<const ExposureCell> cells, const LogisticOptions& opts = {});

double logistic_objective(std::span<const ExposureCell> cells, double alpha, double beta,
                          double ridge);
std::array<double, 2> logistic_gradient(std::span<const ExposureCell> cells, double alpha,
                                        double beta, double ridge);

// --- dynamic time warping ---------------------------------------------------

// Absolute-difference cost, steps (1,0),(0,1),(1,1). An optional
// Sakoe-Chiba band limits |i - j|.
double dtw(std::span<const double> a, std::span<const double> b,
           std::optional<std::size_t> window = std::nullopt);

// --- clustering -------------------------------------------------------------

struct Clustering {
  std::vector<std::size_t> assignment;  // item -> cluster
  std::vector<std::size_t> medoids;     // cluster -> item
  double cost = 0.0;                    // sum of item-to-medoid distances
  std::vector<double> cost_trace;       // after build, then after each swap
};

// PAM: greedy BUILD (ties broken by a seeded order) followed by best-swap
// iterations until no swap lowers the cost.
Clustering kmedoids(const Matrix& distances, std::size_t k, std::uint64_t seed);

// Euclidean k-means (k-means++ seeding) on equal-length series.
Clustering kmeans(std::span<const std::vector<double>> series, std::size_t k, std::uint64_t seed,
                  int max_iterations = 100);

// Linear resampling of a series to a fixed length.
std::vector<double> resample(std::span<const double> series, std::size_t length);

// Pairwise distance matrix, parallel over rows with deterministic assembly.
Matrix pairwise(std::size_t n, const std::function<double(std::size_t, std::size_t)>& dist,
                std::size_t threads = 1);

// --- t-SNE ------------------------------------------------------------------

struct TsneOptions {
  double perplexity = 5.0;
  int iterations = 1000;
  std::uint64_t seed = 0;
  double learning_rate = 0.0;  // 0 picks n / exaggeration
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  int momentum_switch_iteration = 250;
  double exaggeration = 4.0;
  int exaggeration_iterations = 100;
  double entropy_tolerance = 1e-4;
};

struct TsneResult {
  std::vector<std::array<double, 2>> coords;
  double initial_kl = 0.0;
  double final_kl = 0.0;
};

// Exact O(n^2) t-SNE from a symmetric distance matrix with zero diagonal.
TsneResult tsne(const Matrix& distances, const TsneOptions& opts = {});

// Symmetrized input affinities (rows sum to 1/n before symmetrization).
Matrix tsne_affinities(const Matrix& distances, double perplexity, double tol = 1e-4);
double tsne_kl(const Matrix& p, std::span<const std::array<double, 2>> y);

}  // namespace culture::stat
