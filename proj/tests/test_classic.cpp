#include "nnl/classic.hpp"

#include <cmath>
#include <numeric>
#include <vector>

#include "test_util.hpp"

using namespace nnl;
using nnl::test::random_tensor;

namespace {

// Plain gradient descent on (1/2N)||U w - s||^2 + lambda ||w||^2.
Tensor gd_oracle(const Tensor& U, const Tensor& s, double lambda, double step, int iterations) {
  const double n = static_cast<double>(U.extent(0));
  Tensor w({U.extent(1)});
  for (int i = 0; i < iterations; ++i) {
    Tensor g = scale(matvec(transpose(U), subtract(matvec(U, w), s)), 1.0 / n);
    axpy_into(g, 2.0 * lambda, w);
    axpy_into(w, -step, g);
  }
  return w;
}

Tensor two_blobs(std::size_t per_blob, double sigma, std::uint64_t seed, Tensor& means) {
  means = Tensor::matrix({{0, 0}, {10 * sigma, 0}});
  Rng rng(seed);
  Tensor pts({2 * per_blob, 2});
  for (std::size_t i = 0; i < 2 * per_blob; ++i)
    for (std::size_t d = 0; d < 2; ++d) pts(i, d) = means(i / per_blob, d) + sigma * rng.normal();
  return pts;
}

}  // namespace

TEST_CASE("linear regression") {
  const Tensor s = Tensor::vector({1, -2, 3});
  CHECK_TENSOR_NEAR(linreg_fit(Tensor::identity(3), s).reshaped({3}), s, 1e-14);

  const Tensor U = random_tensor({20, 4}, 1);
  const Tensor w_star = Tensor::vector({0.5, -1, 2, 0.25});
  CHECK_TENSOR_NEAR(linreg_fit(U, matvec(U, w_star)).reshaped({4}), w_star, 1e-10);

  const Tensor U4 = Tensor::matrix({{1, 0.5}, {1, -1}, {1, 2}, {1, 0}});
  const Tensor s4 = Tensor::vector({1, 0, 3, 0.5});
  CHECK_TENSOR_NEAR(linreg_fit(U4, s4).reshaped({2}), gd_oracle(U4, s4, 0.0, 0.3, 20000), 1e-6);
}

TEST_CASE("linear regression rejects singular normal equations") {
  const Tensor U = Tensor::matrix({{1, 2}, {2, 4}, {3, 6}});
  CHECK_THROWS_AS(linreg_fit(U, Tensor::vector({1, 2, 3})), IllConditionedError);
}

TEST_CASE("polynomial features") {
  const std::vector<double> u{2.0, -0.5, 3.0};
  const Tensor f0 = poly_features(u, 0);
  CHECK(f0 == Tensor::ones({3, 1}));
  const Tensor f3 = poly_features(u, 3);
  CHECK(f3(0, 0) == 1);
  CHECK(f3(0, 1) == 2);
  CHECK(f3(0, 2) == 4);
  CHECK(f3(0, 3) == 8);

  const Tensor W = Tensor::vector({0.3, -1.2, 0.7, 2.0});
  const Tensor p = matvec(f3, W);
  for (std::size_t i = 0; i < u.size(); ++i) CHECK(poly_eval(W, u[i]) == doctest::Approx(p[i]).epsilon(1e-14));
}

TEST_CASE("ridge regression") {
  const Tensor U = random_tensor({10, 3}, 2);
  const Tensor s = random_tensor({10}, 3);
  CHECK_TENSOR_NEAR(ridge_fit(U, s, 0.0), linreg_fit(U, s), 1e-14);
  CHECK(l2_norm(ridge_fit(U, s, 1e6)) < 1e-3);

  const Tensor U6 = random_tensor({6, 4}, 4);
  const Tensor s6 = random_tensor({6}, 5);
  CHECK_TENSOR_NEAR(ridge_fit(U6, s6, 0.1).reshaped({4}), gd_oracle(U6, s6, 0.1, 0.5, 20000), 1e-6);
}

TEST_CASE("fitting a polynomial of degree 0 gives the mean") {
  Rng rng(6);
  const Samples1d d = noisy_sine(15, 0.25, rng);
  const Tensor W = ridge_fit(poly_features(d.u, 0), Tensor({15}, d.s), 0.0);
  const double mean = std::accumulate(d.s.begin(), d.s.end(), 0.0) / 15.0;
  CHECK(W[0] == doctest::Approx(mean).epsilon(1e-12));
  for (double u : d.u) CHECK((u >= -1.0 && u <= 1.0));
}

TEST_CASE("estimator statistics") {
  const std::vector<double> constant(10, 3.0);
  const EstimatorStats c = estimator_stats(constant, 1.0);
  CHECK(c.variance == 0.0);
  CHECK(c.bias == 2.0);
  CHECK(c.mse == 4.0);

  const std::vector<double> sym{1.0, 3.0, 0.0, 4.0};
  const EstimatorStats u = estimator_stats(sym, 2.0);
  CHECK(u.bias == 0.0);
  CHECK(u.mse == u.variance);

  const std::vector<double> three{1.0, 2.0, 3.0};
  const EstimatorStats t = estimator_stats(three, 2.0);
  CHECK(t.bias == 0.0);
  CHECK(t.variance == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(t.mse == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("k-means distortion never increases") {
  const Tensor pts = random_tensor({60, 2}, 7, -5, 5);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const KMeansResult r = kmeans(pts, 4, seed, {3, 500});
    for (const KMeansRun& run : r.runs) {
      for (std::size_t i = 1; i < run.distortion.size(); ++i) CHECK(run.distortion[i] <= run.distortion[i - 1]);
      CHECK(run.converged);
    }
    CHECK(r.distortion == doctest::Approx(distortion(pts, r.centroids, r.assignment)).epsilon(1e-12));
    CHECK(r.distortion == r.runs[r.best_restart].distortion.back());
  }
}

TEST_CASE("k-means special cases") {
  const Tensor pts = random_tensor({7, 3}, 8);
  const KMeansResult own = kmeans(pts, 7, 1);
  CHECK(own.distortion == 0.0);

  const KMeansResult one = kmeans(pts, 1, 2);
  for (std::size_t d = 0; d < 3; ++d) {
    double m = 0.0;
    for (std::size_t i = 0; i < 7; ++i) m += pts(i, d);
    CHECK(one.centroids(0, d) == doctest::Approx(m / 7).epsilon(1e-14));
  }
  CHECK_THROWS(kmeans(pts, 8, 0));
  CHECK_THROWS(kmeans(pts, 0, 0));
}

TEST_CASE("k-means recovers well separated blobs") {
  Tensor means;
  const Tensor pts = two_blobs(2000, 1.0, 9, means);
  const KMeansResult r = kmeans(pts, 2, 3, {5, 500});
  const std::size_t first = r.centroids(0, 0) < r.centroids(1, 0) ? 0 : 1;
  for (std::size_t c = 0; c < 2; ++c) {
    const std::size_t row = c == 0 ? first : 1 - first;
    for (std::size_t d = 0; d < 2; ++d) CHECK(std::abs(r.centroids(row, d) - means(c, d)) < 0.1);
  }
  for (std::size_t i = 0; i < 4000; ++i) CHECK(r.assignment[i] == (i < 2000 ? first : 1 - first));
}
