#include "nnl/classic.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "nnl/rng.hpp"

namespace nnl {

namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Matrix to_eigen(const Tensor& t) {
  if (t.rank() == 1) return Eigen::Map<const Matrix>(t.data(), static_cast<Eigen::Index>(t.size()), 1);
  if (t.rank() != 2) throw ShapeError("expected a vector or matrix, got " + to_string(t.shape()));
  return Eigen::Map<const Matrix>(t.data(), static_cast<Eigen::Index>(t.extent(0)),
                                  static_cast<Eigen::Index>(t.extent(1)));
}

Tensor from_eigen(const Matrix& m, bool as_vector) {
  std::vector<double> values(m.data(), m.data() + m.size());
  if (as_vector) return Tensor({static_cast<std::size_t>(m.rows())}, std::move(values));
  return Tensor({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())}, std::move(values));
}

void check_design(const Tensor& U, const Tensor& S) {
  if (U.rank() != 2) throw ShapeError("design matrix must be (N, d), got " + to_string(U.shape()));
  if (S.rank() < 1 || S.rank() > 2 || S.extent(0) != U.extent(0)) {
    throw ShapeError("supervision " + to_string(S.shape()) + " does not match " +
                     std::to_string(U.extent(0)) + " rows");
  }
}

Tensor solve_normal(const Tensor& U, const Tensor& S, double ridge, bool check_condition) {
  check_design(U, S);
  const Matrix u = to_eigen(U);
  const Matrix s = to_eigen(S);
  Matrix a = u.transpose() * u;
  if (ridge > 0) a.diagonal().array() += ridge;
  if (check_condition) {
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0) || hi / lo > kMaxCondition) {
      throw IllConditionedError("normal matrix U^T U is singular or ill-conditioned (condition " +
                                (lo > 0 ? std::to_string(hi / lo) : std::string("inf")) + ")");
    }
  }
  const Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) throw IllConditionedError("normal matrix is not positive definite");
  const Matrix w = llt.solve(u.transpose() * s);
  return from_eigen(w, S.rank() == 1);
}

}  // namespace

Tensor linreg_fit(const Tensor& U, const Tensor& S) { return solve_normal(U, S, 0.0, true); }

Tensor poly_features(std::span<const double> u, std::size_t degree) {
  if (u.empty()) throw std::invalid_argument("poly_features: no samples");
  Tensor out({u.size(), degree + 1});
  for (std::size_t i = 0; i < u.size(); ++i) {
    double p = 1.0;
    for (std::size_t k = 0; k <= degree; ++k) {
      out(i, k) = p;
      p *= u[i];
    }
  }
  return out;
}

double poly_eval(const Tensor& W, double u) {
  double acc = 0.0;
  for (std::size_t k = W.size(); k-- > 0;) acc = acc * u + W[k];
  return acc;
}

Tensor ridge_fit(const Tensor& U, const Tensor& S, double lambda) {
  if (!(lambda >= 0)) throw std::invalid_argument("ridge_fit: lambda must be >= 0");
  if (lambda == 0) return linreg_fit(U, S);
  check_design(U, S);
  return solve_normal(U, S, 2.0 * static_cast<double>(U.extent(0)) * lambda, false);
}

double fit_loss(const Tensor& U, const Tensor& S, const Tensor& W) {
  check_design(U, S);
  const Tensor W2 = W.rank() == 1 ? W.reshaped({W.size(), 1}) : W;
  const Tensor pred = matmul(U, W2);
  double acc = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const double d = pred[k] - S[k];
    acc += d * d;
  }
  return acc / (2.0 * static_cast<double>(U.extent(0)));
}

EstimatorStats estimator_stats(std::span<const double> estimates, double truth) {
  if (estimates.empty()) throw std::invalid_argument("estimator_stats: no samples");
  const double n = static_cast<double>(estimates.size());
  double sum = 0.0, sum_sq = 0.0, err_sq = 0.0;
  for (double e : estimates) {
    sum += e;
    sum_sq += e * e;
    err_sq += (e - truth) * (e - truth);
  }
  EstimatorStats s;
  const double mean = sum / n;
  s.bias = mean - truth;
  s.variance = sum_sq / n - mean * mean;
  s.mse = err_sq / n;
  const double gap = std::abs(s.mse - (s.variance + s.bias * s.bias));
  if (gap > 1e-10 * std::max(1.0, s.mse)) {
    throw std::logic_error("estimator_stats: mse != variance + bias^2 (gap " + std::to_string(gap) + ")");
  }
  return s;
}

double distortion(const Tensor& points, const Tensor& centroids,
                  std::span<const std::size_t> assignment) {
  const std::size_t N = points.extent(0), d = points.extent(1);
  double acc = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t c = 0; c < d; ++c) {
      const double diff = points(i, c) - centroids(assignment[i], c);
      acc += diff * diff;
    }
  }
  return acc;
}

namespace {

double sq_dist(const Tensor& points, std::size_t i, const Tensor& centroids, std::size_t j) {
  double acc = 0.0;
  for (std::size_t c = 0; c < points.extent(1); ++c) {
    const double diff = points(i, c) - centroids(j, c);
    acc += diff * diff;
  }
  return acc;
}

// Returns true when any assignment changed.
bool assign(const Tensor& points, const Tensor& centroids, std::vector<std::size_t>& assignment) {
  bool changed = false;
  const std::size_t k = centroids.extent(0);
  for (std::size_t i = 0; i < points.extent(0); ++i) {
    std::size_t best = 0;
    double best_d = sq_dist(points, i, centroids, 0);
    for (std::size_t j = 1; j < k; ++j) {
      const double dj = sq_dist(points, i, centroids, j);
      if (dj < best_d) {
        best_d = dj;
        best = j;
      }
    }
    if (assignment[i] != best) {
      assignment[i] = best;
      changed = true;
    }
  }
  return changed;
}

void update(const Tensor& points, Tensor& centroids, const std::vector<std::size_t>& assignment) {
  const std::size_t N = points.extent(0), d = points.extent(1), k = centroids.extent(0);
  Tensor sums({k, d});
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < N; ++i) {
    ++counts[assignment[i]];
    for (std::size_t c = 0; c < d; ++c) sums(assignment[i], c) += points(i, c);
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (counts[j] == 0) continue;
    for (std::size_t c = 0; c < d; ++c) centroids(j, c) = sums(j, c) / static_cast<double>(counts[j]);
  }
  std::vector<bool> taken(N, false);
  for (std::size_t j = 0; j < k; ++j) {
    if (counts[j] != 0) continue;
    // Empty cluster: move it onto the point farthest from its own centroid.
    std::size_t far = 0;
    double far_d = -1.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double di = sq_dist(points, i, centroids, assignment[i]);
      if (!taken[i] && di > far_d) {
        far_d = di;
        far = i;
      }
    }
    taken[far] = true;
    for (std::size_t c = 0; c < d; ++c) centroids(j, c) = points(far, c);
  }
}

}  // namespace

KMeansResult kmeans(const Tensor& points, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options) {
  if (points.rank() != 2) throw ShapeError("kmeans: points must be (N, d), got " + to_string(points.shape()));
  const std::size_t N = points.extent(0), d = points.extent(1);
  if (k == 0) throw std::invalid_argument("kmeans: k must be positive");
  if (k > N) {
    throw std::invalid_argument("kmeans: k = " + std::to_string(k) + " exceeds the " +
                                std::to_string(N) + " points");
  }
  if (options.restarts == 0) throw std::invalid_argument("kmeans: restarts must be positive");

  KMeansResult best;
  for (std::size_t r = 0; r < options.restarts; ++r) {
    Rng rng(mix_seed(seed, r));
    std::vector<std::size_t> order(N);
    std::iota(order.begin(), order.end(), 0);
    Tensor centroids({k, d});
    for (std::size_t j = 0; j < k; ++j) {
      std::swap(order[j], order[j + rng.index(N - j)]);
      for (std::size_t c = 0; c < d; ++c) centroids(j, c) = points(order[j], c);
    }
    std::vector<std::size_t> assignment(N, k);  // k = unassigned
    assign(points, centroids, assignment);
    KMeansRun run;
    run.distortion.push_back(distortion(points, centroids, assignment));
    while (run.iterations < options.max_iterations) {
      update(points, centroids, assignment);
      ++run.iterations;
      const bool changed = assign(points, centroids, assignment);
      const double value = distortion(points, centroids, assignment);
      const double prev = run.distortion.back();
      if (value > prev + 1e-12 * std::max(1.0, prev)) {
        throw std::logic_error("kmeans: distortion increased from " + std::to_string(prev) + " to " +
                               std::to_string(value));
      }
      run.distortion.push_back(value);
      if (!changed) {
        run.converged = true;
        break;
      }
    }
    const double final_value = run.distortion.back();
    if (r == 0 || final_value < best.distortion) {
      best.centroids = centroids;
      best.assignment = assignment;
      best.distortion = final_value;
      best.best_restart = r;
    }
    best.runs.push_back(std::move(run));
  }
  return best;
}

Samples1d noisy_sine(std::size_t n, double noise, Rng& rng) {
  Samples1d out;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = 2.0 * rng.uniform() - 1.0;
    out.u.push_back(u);
    out.s.push_back(std::sin(std::numbers::pi * u) + noise * rng.normal());
  }
  return out;
}

}  // namespace nnl
