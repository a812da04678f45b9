#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gsgan/metrics.hpp"
#include "gsgan/random.hpp"

using namespace gsgan;

TEST_CASE("pairwise diversity basics") {
  const Tensor a = Tensor::zeros({1, 4, 4});
  SUBCASE("identical images give zero") {
    CHECK(pairwise_diversity({a, a, a}) == 0.0);
  }
  SUBCASE("constant offset of 1 gives exactly 1") {
    const Tensor b = Tensor::full({1, 4, 4}, 1.0);
    CHECK(pairwise_diversity({a, b}) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("n=3 averages the three pairs") {
    const Tensor b = Tensor::full({1, 4, 4}, 1.0);
    const Tensor c = Tensor::full({1, 4, 4}, 3.0);
    // pair distances: |a-b|=1, |a-c|=3, |b-c|=2
    CHECK(pairwise_diversity({a, b, c}) == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("permutation invariance") {
    RngEngine rng(71);
    std::vector<Tensor> imgs;
    for (int i = 0; i < 5; ++i) {
      std::vector<double> d(16);
      for (auto& v : d) v = normal_sample(rng);
      imgs.push_back(Tensor::from_data({1, 4, 4}, d));
    }
    const double base = pairwise_diversity(imgs);
    std::reverse(imgs.begin(), imgs.end());
    CHECK(pairwise_diversity(imgs) == doctest::Approx(base).epsilon(1e-12));
  }
  SUBCASE("fewer than two images errors") {
    CHECK_THROWS_AS(pairwise_diversity({a}), std::invalid_argument);
  }
}

namespace {

std::vector<std::vector<double>> gaussian_cloud(RngEngine& rng, std::size_t n, double mean,
                                                double stddev) {
  std::vector<std::vector<double>> out(n);
  for (auto& row : out) row = {mean + stddev * normal_sample(rng)};
  return out;
}

}  // namespace

TEST_CASE("frechet feature distance: identical sets are ~0") {
  RngEngine rng(73);
  std::vector<std::vector<double>> feats;
  for (int i = 0; i < 32; ++i) {
    feats.push_back({normal_sample(rng), normal_sample(rng), normal_sample(rng)});
  }
  CHECK(std::abs(frechet_feature_distance(feats, feats)) <= 1e-6);
}

TEST_CASE("frechet feature distance: 1-D Gaussian closed forms at 1e4 samples") {
  RngEngine rng(74);
  // N(0,1) vs N(1,1): (mu difference)^2 = 1
  const auto a = gaussian_cloud(rng, 10000, 0.0, 1.0);
  const auto b = gaussian_cloud(rng, 10000, 1.0, 1.0);
  CHECK(frechet_feature_distance(a, b) == doctest::Approx(1.0).epsilon(0.1));

  // equal means, sigma 1 vs 2: (sqrt(1) - sqrt(4))^2 = 1
  const auto c = gaussian_cloud(rng, 10000, 0.0, 1.0);
  const auto d = gaussian_cloud(rng, 10000, 0.0, 2.0);
  CHECK(frechet_feature_distance(c, d) == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("frechet feature distance: symmetry and self-distance dominance") {
  RngEngine rng(75);
  std::vector<std::vector<double>> a, b;
  for (int i = 0; i < 64; ++i) {
    a.push_back({normal_sample(rng), normal_sample(rng), normal_sample(rng),
                 normal_sample(rng)});
    b.push_back({1.0 + normal_sample(rng), normal_sample(rng), 0.5 * normal_sample(rng),
                 normal_sample(rng)});
  }
  const double ab = frechet_feature_distance(a, b);
  const double ba = frechet_feature_distance(b, a);
  CHECK(std::abs(ab - ba) <= 1e-8);
  CHECK(frechet_feature_distance(a, a) <= ab);
  CHECK_THROWS_AS(frechet_feature_distance(a, {{1.0}, {2.0}}), std::invalid_argument);
}

TEST_CASE("symmetric eigensolver reproduces known spectra") {
  // [[2,1],[1,2]] -> eigenvalues {1,3}
  std::vector<double> vals = symmetric_eigenvalues({2, 1, 1, 2}, 2);
  std::sort(vals.begin(), vals.end());
  CHECK(vals[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(vals[1] == doctest::Approx(3.0).epsilon(1e-12));

  // reconstruction: A == Q diag(vals) Q^T for a random symmetric matrix
  RngEngine rng(76);
  const std::size_t n = 6;
  std::vector<double> a(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      a[i * n + j] = a[j * n + i] = normal_sample(rng);
    }
  }
  std::vector<double> q;
  const std::vector<double> lam = symmetric_eigenvalues(a, n, &q);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += q[i * n + k] * lam[k] * q[j * n + k];
      CHECK(acc == doctest::Approx(a[i * n + j]).epsilon(1e-8));
    }
  }
}

TEST_CASE("smoothness of synthetic feature paths") {
  SUBCASE("linear advance gives 1") {
    const std::size_t k = 6, c = 2, h = 4, w = 4;
    std::vector<double> data(k * c * h * w);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < c * h * w; ++j) {
        data[i * c * h * w + j] = static_cast<double>(i) * 0.37 + static_cast<double>(j);
      }
    }
    CHECK(smoothness_from_features(Tensor::from_data({k, c, h, w}, data)) ==
          doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("constant path with one jump gives k-1") {
    const std::size_t k = 5, c = 1, h = 4, w = 4;
    std::vector<double> data(k * c * h * w, 0.0);
    for (std::size_t j = 0; j < c * h * w; ++j) data[(k - 1) * c * h * w + j] = 1.0;  // last jumps
    CHECK(smoothness_from_features(Tensor::from_data({k, c, h, w}, data)) ==
          doctest::Approx(static_cast<double>(k - 1)).epsilon(1e-12));
  }
  SUBCASE("fully constant path returns the degenerate convention") {
    CHECK(smoothness_from_features(Tensor::zeros({4, 1, 4, 4})) == 1.0);
  }
}

TEST_CASE("interpolation smoothness on a generator") {
  RngEngine init(77);
  const Generator g(16, 16, init);
  RngEngine zrng(78);
  const Tensor z = sample_latents(1, 16, zrng);
  const Tensor z_row = reshape(z, {16});
  SUBCASE("degenerate path z_start == z_end") {
    CHECK(interpolation_smoothness(g, z_row, z_row, 5) == 1.0);
  }
  SUBCASE("generic path is finite and >= 1") {
    const Tensor z2 = reshape(sample_latents(1, 16, zrng), {16});
    const double s = interpolation_smoothness(g, z_row, z2, 6);
    CHECK(s >= 1.0);
    CHECK(std::isfinite(s));
  }
  SUBCASE("k below 3 errors") {
    CHECK_THROWS_AS(interpolation_smoothness(g, z_row, z_row, 2), std::invalid_argument);
  }
}
