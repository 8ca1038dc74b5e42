#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "nnl/rng.hpp"
#include "nnl/tensor.hpp"

namespace nnl {

/// Raised when the normal matrix U^T U is singular or its condition number
/// exceeds kMaxCondition.
class IllConditionedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kMaxCondition = 1e12;

/// Least squares W = argmin 1/2 ||U W - S||^2 for U (N, d) and S (N) or
/// (N, k), solved from the normal equations by a Cholesky factorization.
Tensor linreg_fit(const Tensor& U, const Tensor& S);

/// Rows (1, u, u^2, ..., u^r) for every sample u.
Tensor poly_features(std::span<const double> u, std::size_t degree);

/// p(u) = sum_k W_k u^k by Horner's rule.
double poly_eval(const Tensor& W, double u);

/// Minimizer of (1/2N) ||U W - S||^2 + lambda ||W||^2, i.e. the solution of
/// (U^T U + 2 N lambda I) W = U^T S. lambda = 0 is plain least squares.
Tensor ridge_fit(const Tensor& U, const Tensor& S, double lambda);

/// (1/2N) ||U W - S||^2, the loss the fits minimize (without the penalty).
double fit_loss(const Tensor& U, const Tensor& S, const Tensor& W);

/// Scalar regression samples s_i = f(u_i) + noise.
struct Samples1d {
  std::vector<double> u, s;
};

/// u uniform on [-1, 1], s = sin(pi u) + N(0, noise^2), drawn in sample order.
Samples1d noisy_sine(std::size_t n, double noise, Rng& rng);

struct EstimatorStats {
  double bias = 0.0;      // mean(est) - truth
  double variance = 0.0;  // mean(est^2) - mean(est)^2
  double mse = 0.0;       // mean((est - truth)^2)
};

/// Throws std::logic_error if mse = variance + bias^2 fails beyond 1e-10
/// (relative to max(1, mse)).
EstimatorStats estimator_stats(std::span<const double> estimates, double truth);

struct KMeansRun {
  std::vector<double> distortion;  // after the initial assignment and every iteration
  std::size_t iterations = 0;
  bool converged = false;  // assignments stabilized before the iteration cap
};

struct KMeansResult {
  Tensor centroids;                     // (k, d)
  std::vector<std::size_t> assignment;  // 0-based cluster per point
  double distortion = 0.0;              // sum_i ||u_i - mu_{c_i}||^2
  std::size_t best_restart = 0;
  std::vector<KMeansRun> runs;          // one per restart
};

struct KMeansOptions {
  std::size_t restarts = 1;
  std::size_t max_iterations = 500;
};

/// Lloyd's algorithm on the rows of `points` (N, d). Each restart starts from
/// k distinct points drawn without replacement; a cluster that empties is
/// re-seeded at the point farthest from its own centroid. Ties in the
/// assignment go to the lowest cluster index and ties across restarts to the
/// earliest restart.
KMeansResult kmeans(const Tensor& points, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options = {});

double distortion(const Tensor& points, const Tensor& centroids,
                  std::span<const std::size_t> assignment);

}  // namespace nnl
