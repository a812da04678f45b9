#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gsgan/preshape.hpp"
#include "gsgan/random.hpp"

using namespace gsgan;

namespace {

Tensor random_feature(const Shape& shape, RngEngine& rng) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  std::vector<double> data(n);
  for (auto& v : data) v = normal_sample(rng);
  return Tensor::from_data(shape, std::move(data));
}

PreShape random_preshape(std::size_t m, RngEngine& rng) {
  return project_preshape(random_feature({2 * m}, rng));
}

// Independent recomputation of the pre-shape invariants from raw data.
void check_preshape_invariants(const PreShape& ps, double tol = 1e-9) {
  const std::size_t m = ps.landmarks();
  const auto& d = ps.points.data();
  double mean_x = 0.0, mean_y = 0.0, sq = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    mean_x += d[j];
    mean_y += d[m + j];
  }
  for (double v : d) sq += v * v;
  CHECK(std::abs(mean_x / static_cast<double>(m)) <= tol);
  CHECK(std::abs(mean_y / static_cast<double>(m)) <= tol);
  CHECK(std::abs(std::sqrt(sq) - 1.0) <= tol);
}

}  // namespace

TEST_CASE("projection of a centered two-landmark feature") {
  const PreShape ps = project_preshape(Tensor::from_data({4}, {1, -1, 0, 0}));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK(ps.points.at(0) == doctest::Approx(inv_sqrt2).epsilon(1e-12));
  CHECK(ps.points.at(1) == doctest::Approx(-inv_sqrt2).epsilon(1e-12));
  CHECK(ps.points.at(2) == 0.0);
  CHECK(ps.points.at(3) == 0.0);
}

TEST_CASE("projection rejects odd and degenerate features") {
  CHECK_THROWS_WITH_AS(project_preshape(Tensor::from_data({3}, {1, 2, 3})),
                       doctest::Contains("odd feature volume"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(project_preshape(Tensor::zeros({4, 4, 4})),
                       doctest::Contains("degenerate feature"), std::runtime_error);
  // constant rows center to zero as well
  CHECK_THROWS_WITH_AS(project_preshape(Tensor::full({2, 4}, 3.5)),
                       doctest::Contains("degenerate feature"), std::runtime_error);
}

TEST_CASE("projection of random 4x4x4 features satisfies the invariants") {
  RngEngine rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    check_preshape_invariants(project_preshape(random_feature({4, 4, 4}, rng)));
  }
}

TEST_CASE("projection is idempotent on already-projected configurations") {
  RngEngine rng(103);
  const PreShape ps = random_preshape(32, rng);
  const PreShape again = project_preshape(ps.points);
  for (std::size_t i = 0; i < ps.points.size(); ++i) {
    CHECK(std::abs(again.points.at(i) - ps.points.at(i)) <= 1e-12);
  }
}

TEST_CASE("geodesic distance identities") {
  RngEngine rng(107);
  const PreShape tau = random_preshape(16, rng);
  CHECK(geodesic_distance(tau, tau) == doctest::Approx(0.0).epsilon(1e-12));

  const PreShape a = project_preshape(Tensor::from_data({4}, {1, -1, 0, 0}));
  const PreShape b = project_preshape(Tensor::from_data({4}, {0, 0, 1, -1}));
  // rows swap: configurations are orthogonal in R^{2m}
  CHECK(geodesic_distance(a, b) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-12));

  const PreShape c = random_preshape(16, rng);
  CHECK(geodesic_distance(tau, c) == geodesic_distance(c, tau));  // exact
}

TEST_CASE("geodesic curve endpoints and midpoint") {
  RngEngine rng(109);
  const PreShape t1 = random_preshape(24, rng);
  const PreShape t2 = random_preshape(24, rng);
  const double d = geodesic_distance(t1, t2);

  const PreShape at0 = geodesic_curve_at(t1, t2, 0.0);
  for (std::size_t i = 0; i < t1.points.size(); ++i) {
    CHECK(std::abs(at0.points.at(i) - t1.points.at(i)) <= 1e-12);
  }
  const PreShape at_d = geodesic_curve_at(t1, t2, d);
  for (std::size_t i = 0; i < t2.points.size(); ++i) {
    CHECK(std::abs(at_d.points.at(i) - t2.points.at(i)) <= 1e-9);
  }
  const PreShape mid = geodesic_curve_at(t1, t2, d / 2.0);
  CHECK(std::abs(geodesic_distance(t1, mid) - d / 2.0) <= 1e-7);
  CHECK(std::abs(geodesic_distance(mid, t2) - d / 2.0) <= 1e-7);
  check_preshape_invariants(mid);
}

TEST_CASE("geodesic curve validates the arc parameter") {
  RngEngine rng(113);
  const PreShape t1 = random_preshape(8, rng);
  const PreShape t2 = random_preshape(8, rng);
  const double d = geodesic_distance(t1, t2);
  CHECK_THROWS_AS(geodesic_curve_at(t1, t2, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(geodesic_curve_at(t1, t2, d + 0.1), std::invalid_argument);
  CHECK_THROWS_AS(make_geodesic_spec(t1, t2, d + 0.1), std::invalid_argument);
}

TEST_CASE("monotone arc: distance from tau1 grows strictly along the curve") {
  RngEngine rng(127);
  const PreShape t1 = random_preshape(16, rng);
  const PreShape t2 = random_preshape(16, rng);
  const double d = geodesic_distance(t1, t2);
  double prev = -1.0;
  for (int i = 0; i <= 8; ++i) {
    const double s = d * static_cast<double>(i) / 8.0;
    const double dist = geodesic_distance(t1, geodesic_curve_at(t1, t2, s));
    CHECK(dist > prev + 1e-9 - (i == 0 ? 1e-9 : 0.0));
    prev = dist;
  }
}

TEST_CASE("coincident endpoints return tau1, antipodal endpoints throw") {
  RngEngine rng(131);
  const PreShape t1 = random_preshape(8, rng);
  const PreShape same = geodesic_curve_at(t1, t1, 0.0);
  for (std::size_t i = 0; i < t1.points.size(); ++i) {
    CHECK(same.points.at(i) == t1.points.at(i));
  }
  const PreShape anti{scale(t1.points, -1.0)};
  CHECK_THROWS_WITH_AS(geodesic_curve_at(t1, anti, 0.5), doctest::Contains("antipodal"),
                       std::runtime_error);
}

TEST_CASE("surface with a one-hot weight recovers the corresponding input") {
  RngEngine rng(137);
  std::vector<PreShape> taus;
  for (int i = 0; i < 4; ++i) taus.push_back(random_preshape(16, rng));
  for (std::size_t j = 0; j < taus.size(); ++j) {
    WeightVector w{std::vector<double>(taus.size(), 0.0)};
    w.weights[j] = 1.0;
    const PreShape out = geodesic_surface_point(taus, w);
    for (std::size_t i = 0; i < out.points.size(); ++i) {
      CHECK(std::abs(out.points.at(i) - taus[j].points.at(i)) <= 1e-9);
    }
  }
}

TEST_CASE("surface for n=2 equals the curve at the weight fraction") {
  RngEngine rng(139);
  for (int trial = 0; trial < 25; ++trial) {
    const PreShape t1 = random_preshape(12, rng);
    const PreShape t2 = random_preshape(12, rng);
    const double w1 = uniform01(rng) + 1e-3;
    const double w2 = uniform01(rng) + 1e-3;
    const PreShape surf = geodesic_surface_point({t1, t2}, WeightVector{{w1, w2}});
    const PreShape curve = geodesic_curve_fraction(t1, t2, w2 / (w1 + w2));
    for (std::size_t i = 0; i < surf.points.size(); ++i) {
      CHECK(std::abs(surf.points.at(i) - curve.points.at(i)) <= 1e-9);
    }
  }
}

TEST_CASE("surface n=2 with equal weights is the geodesic midpoint") {
  RngEngine rng(149);
  const PreShape t1 = random_preshape(20, rng);
  const PreShape t2 = random_preshape(20, rng);
  const double d = geodesic_distance(t1, t2);
  const PreShape surf = geodesic_surface_point({t1, t2}, WeightVector{{1.0, 1.0}});
  CHECK(std::abs(geodesic_distance(t1, surf) - d / 2.0) <= 1e-7);
  check_preshape_invariants(surf);
}

TEST_CASE("surface is invariant under positive weight scaling") {
  RngEngine rng(151);
  std::vector<PreShape> taus;
  for (int i = 0; i < 5; ++i) taus.push_back(random_preshape(16, rng));
  WeightVector w{{0.3, 0.1, 0.25, 0.15, 0.2}};
  WeightVector w_scaled = w;
  for (auto& v : w_scaled.weights) v *= 7.5;
  const PreShape a = geodesic_surface_point(taus, w);
  const PreShape b = geodesic_surface_point(taus, w_scaled);
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(std::abs(a.points.at(i) - b.points.at(i)) <= 1e-12);
  }
}

TEST_CASE("surface outputs satisfy the pre-shape invariants") {
  RngEngine rng(157);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<PreShape> taus;
    for (int i = 0; i < 4; ++i) taus.push_back(random_preshape(32, rng));
    const WeightVector w{dirichlet_sample(rng, 4, 1.0)};
    check_preshape_invariants(geodesic_surface_point(taus, w));
  }
}

TEST_CASE("surface input validation") {
  RngEngine rng(163);
  const PreShape t1 = random_preshape(8, rng);
  CHECK_THROWS_AS(geodesic_surface_point({}, WeightVector{{}}), std::invalid_argument);
  CHECK_THROWS_AS(geodesic_surface_point({t1}, WeightVector{{1.0, 2.0}}), std::invalid_argument);
  CHECK_THROWS_AS(geodesic_surface_point({t1}, WeightVector{{0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(geodesic_surface_point({t1}, WeightVector{{-1.0}}), std::invalid_argument);
  // surface of one point is that point
  const PreShape out = geodesic_surface_point({t1}, WeightVector{{2.0}});
  for (std::size_t i = 0; i < t1.points.size(); ++i) {
    CHECK(out.points.at(i) == t1.points.at(i));
  }
}

TEST_CASE("curve points keep unit norm along the whole arc") {
  RngEngine rng(167);
  const PreShape t1 = random_preshape(64, rng);
  const PreShape t2 = random_preshape(64, rng);
  const double d = geodesic_distance(t1, t2);
  for (int i = 1; i < 8; ++i) {
    check_preshape_invariants(geodesic_curve_at(t1, t2, d * i / 8.0));
  }
}
