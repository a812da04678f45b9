#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "gsgan/gradcheck.hpp"
#include "gsgan/losses.hpp"
#include "gsgan/random.hpp"

using namespace gsgan;

namespace {

Tensor random_feature(const Shape& shape, RngEngine& rng, bool requires_grad = false) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  std::vector<double> data(n);
  for (auto& v : data) v = normal_sample(rng);
  return Tensor::from_data(shape, std::move(data), requires_grad);
}

}  // namespace

TEST_CASE("interpolation_set endpoints and spacing") {
  const Tensor a = Tensor::from_data({3}, {1, 2, 3});
  const Tensor b = Tensor::from_data({3}, {-1, 0, 5});

  SUBCASE("k=2 is exactly the endpoints") {
    const auto zs = interpolation_set(a, b, 2);
    REQUIRE(zs.size() == 2);
    CHECK(zs[0].data() == a.data());
    CHECK(zs[1].data() == b.data());
  }
  SUBCASE("identical endpoints give identical members") {
    const auto zs = interpolation_set(a, a, 5);
    for (const auto& z : zs) CHECK(z.data() == a.data());
  }
  SUBCASE("scalars 0..3 with k=4") {
    const auto zs = interpolation_set(Tensor::from_data({1}, {0.0}),
                                      Tensor::from_data({1}, {3.0}), 4);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(zs[i].value() == doctest::Approx(static_cast<double>(i)).epsilon(1e-15));
    }
  }
  SUBCASE("consecutive spacing is constant") {
    RngEngine rng(61);
    const Tensor za = random_feature({16}, rng);
    const Tensor zb = random_feature({16}, rng);
    const auto zs = interpolation_set(za, zb, 7);
    double first = -1.0;
    for (std::size_t i = 0; i + 1 < zs.size(); ++i) {
      const double step = l2_norm(sub(zs[i + 1], zs[i])).value();
      if (i == 0) first = step;
      CHECK(std::abs(step - first) <= 1e-12);
    }
  }
  SUBCASE("k < 2 errors") {
    CHECK_THROWS_AS(interpolation_set(a, b, 1), std::invalid_argument);
  }
}

TEST_CASE("interpolation_loss values") {
  CHECK(interpolation_loss(Tensor::from_data({3}, {0.5, 0.5, 0.5})).value() ==
        doctest::Approx(std::log(0.5)).epsilon(1e-12));
  CHECK(std::abs(interpolation_loss(Tensor::full({4}, 1.0 - 1e-7)).value()) <= 1e-6);
  CHECK(interpolation_loss(Tensor::from_data({2}, {0.25, 0.75})).value() ==
        doctest::Approx((std::log(0.25) + std::log(0.75)) / 2.0).epsilon(1e-12));
  // clamp keeps the loss finite at the boundaries
  CHECK(std::isfinite(interpolation_loss(Tensor::from_data({2}, {0.0, 1.0})).value()));
}

TEST_CASE("distance regularization target for k=4 is [1/6,1/6,1/6,1/2]") {
  const auto q = distance_regularization_target(4);
  REQUIRE(q.size() == 4);
  CHECK(q[0] == 1.0 / 6.0);
  CHECK(q[1] == 1.0 / 6.0);
  CHECK(q[2] == 1.0 / 6.0);
  CHECK(q[3] == 0.5);
}

TEST_CASE("distance regularization of identical features: hand-evaluated KL") {
  RngEngine rng(62);
  const Tensor f = random_feature({2, 8, 8}, rng);
  const std::vector<Tensor> feats(4, f);
  const double got = distance_regularization(feats, 4).value();
  // dist = 0 everywhere, softmax uniform: mean_i q_i (log q_i - log(1/4))
  const double q[] = {1.0 / 6, 1.0 / 6, 1.0 / 6, 0.5};
  double want = 0.0;
  for (double qi : q) want += qi * (std::log(qi) - std::log(0.25));
  want /= 4.0;
  CHECK(got == doctest::Approx(want).epsilon(1e-12));
  CHECK(got > 0.0);
}

TEST_CASE("distance vector solving softmax(dist)=q zeroes the loss") {
  const auto q = distance_regularization_target(4);
  std::vector<double> dist(4);
  for (std::size_t i = 0; i < 4; ++i) dist[i] = std::log(q[i]) + 2.5;  // arbitrary shift
  const double loss =
      distance_regularization_from_distances(Tensor::from_data({4}, dist)).value();
  CHECK(std::abs(loss) <= 1e-15);
}

TEST_CASE("distance regularization is nonnegative on random distance vectors") {
  RngEngine rng(63);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> dist(4);
    for (auto& v : dist) v = 3.0 * normal_sample(rng);
    CHECK(distance_regularization_from_distances(Tensor::from_data({4}, dist)).value() >=
          -1e-15);
  }
}

TEST_CASE("distance regularization is nonnegative on random feature sets") {
  RngEngine rng(64);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Tensor> feats;
    for (int i = 0; i < 4; ++i) feats.push_back(random_feature({3, 4, 4}, rng));
    CHECK(distance_regularization(feats, 4).value() >= -1e-15);
  }
}

TEST_CASE("cyclic shift of identical-feature input leaves the loss unchanged") {
  RngEngine rng(65);
  const Tensor f = random_feature({2, 4, 4}, rng);
  std::vector<Tensor> feats(4, f);
  const double base = distance_regularization(feats, 4).value();
  std::rotate(feats.begin(), feats.begin() + 1, feats.end());
  CHECK(distance_regularization(feats, 4).value() == base);
}

TEST_CASE("gradient descent on the features drives softmax(dist) to q") {
  RngEngine rng(4);
  std::vector<Tensor> feats;
  for (int i = 0; i < 4; ++i) feats.push_back(random_feature({6, 1, 1}, rng, true));

  double prev = std::numeric_limits<double>::infinity();
  for (int step = 0; step < 200; ++step) {
    for (auto& f : feats) f.zero_grad();
    const Tensor loss = distance_regularization(feats, 4);
    CHECK(loss.value() < prev);  // strict decrease
    prev = loss.value();
    loss.backward();
    for (auto& f : feats) {
      auto& data = f.data();
      const auto& grad = f.grad();
      for (std::size_t j = 0; j < data.size(); ++j) data[j] -= 0.1 * grad[j];
    }
  }
  const Tensor sm = softmax(consecutive_distance_vector(feats, 4));
  const auto q = distance_regularization_target(4);
  double linf = 0.0;
  for (std::size_t i = 0; i < 4; ++i) linf = std::max(linf, std::abs(sm.at(i) - q[i]));
  CHECK(linf < 0.05);
}

TEST_CASE("distance regularization input validation") {
  RngEngine rng(67);
  std::vector<Tensor> feats{random_feature({2, 4, 4}, rng)};
  CHECK_THROWS_AS(distance_regularization(feats, 1), std::invalid_argument);
  CHECK_THROWS_AS(distance_regularization(feats, 4), std::invalid_argument);
}

TEST_CASE("adversarial loss values") {
  const double eps = kProbEps;
  SUBCASE("confident discriminator minimizes its loss") {
    const Tensor real = Tensor::full({2}, 1.0 - eps);
    const Tensor fake = Tensor::full({2}, eps);
    const auto [lg, ld] = adversarial_losses(real, fake);
    CHECK(ld.value() == doctest::Approx(2.0 * std::log(eps)).epsilon(1e-9));
    CHECK(lg.value() == doctest::Approx(-std::log(eps)).epsilon(1e-9));
  }
  SUBCASE("fake probability one-half") {
    const auto [lg, ld] =
        adversarial_losses(Tensor::full({2}, 0.5), Tensor::full({2}, 0.5));
    CHECK(lg.value() == doctest::Approx(-std::log(0.5)).epsilon(1e-12));
    CHECK(ld.value() == doctest::Approx(2.0 * std::log(0.5)).epsilon(1e-12));
  }
  SUBCASE("raw 0/1 probabilities stay finite through the clamp") {
    const auto [lg, ld] =
        adversarial_losses(Tensor::from_data({2}, {0.0, 1.0}), Tensor::from_data({1}, {1.0}));
    CHECK(std::isfinite(lg.value()));
    CHECK(std::isfinite(ld.value()));
  }
}

TEST_CASE("total objectives combine components with the fixed ratios") {
  SUBCASE("all zero components give zero totals") {
    const LossReport r = total_objectives(0, 0, 0, 0, 0, 0.8, 1.25, 0.8);
    CHECK(r.total_g == 0.0);
    CHECK(r.total_d == 0.0);
  }
  SUBCASE("arithmetic oracle") {
    const LossReport r = total_objectives(1.0, 0.0, 0.5, 0.2, 0.0, 0.8, 1.25, 0.8);
    CHECK(r.total_g == doctest::Approx(0.85).epsilon(1e-15));
  }
  SUBCASE("report identities hold exactly") {
    const LossReport r = total_objectives(0.3, -1.1, 0.25, 0.7, 0.05, 0.8, 1.25, 0.8);
    CHECK(std::abs(r.total_g - (r.l_adv_g - r.lambda1 * r.l_inp + r.lambda2 * r.l_dr)) <= 1e-12);
    CHECK(std::abs(r.total_d - (r.l_adv_d + r.lambda1 * r.l_inp + r.lambda3 * r.l_g)) <= 1e-12);
  }
  SUBCASE("doubling lambda2 doubles the l_dr contribution exactly") {
    // dyadic inputs keep the identity exact in floating point
    const LossReport a = total_objectives(0.5, 0, 0, 0.75, 0, 0.8, 1.25, 0.8);
    const LossReport b = total_objectives(0.5, 0, 0, 0.75, 0, 0.8, 2.5, 0.8);
    CHECK(b.total_g - b.l_adv_g == 2.0 * (a.total_g - a.l_adv_g));
  }
  SUBCASE("non-finite components are rejected by name") {
    CHECK_THROWS_WITH_AS(
        total_objectives(0, 0, std::numeric_limits<double>::quiet_NaN(), 0, 0, 1, 1, 1),
        doctest::Contains("l_inp"), std::runtime_error);
  }
}

TEST_CASE("distance regularization gradient matches finite differences") {
  RngEngine rng(68);
  std::vector<Tensor> feats;
  std::vector<std::pair<std::string, Tensor>> params;
  for (int i = 0; i < 4; ++i) {
    feats.push_back(random_feature({2, 4, 4}, rng, true));
    params.emplace_back("f" + std::to_string(i), feats.back());
  }
  const auto loss_fn = [&] { return distance_regularization(feats, 4); };
  CHECK(max_rel_error(finite_diff_check(loss_fn, params)) <= 1e-4);
}
