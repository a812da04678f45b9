#include "gsgan/losses.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace gsgan {

std::vector<Tensor> interpolation_set(const InterpolationSpec& spec) {
  if (spec.k < 2) throw std::invalid_argument("interpolation_set: k must be >= 2");
  if (!spec.z_start.defined() || !spec.z_end.defined() ||
      spec.z_start.shape() != spec.z_end.shape()) {
    throw std::invalid_argument("interpolation_set: endpoint shape mismatch");
  }
  const auto& a = spec.z_start.data();
  const auto& b = spec.z_end.data();
  std::vector<Tensor> out;
  out.reserve(spec.k);
  for (std::size_t i = 0; i < spec.k; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(spec.k - 1);
    std::vector<double> z(a.size());
    for (std::size_t c = 0; c < z.size(); ++c) z[c] = (1.0 - t) * a[c] + t * b[c];
    out.push_back(Tensor::from_data(spec.z_start.shape(), std::move(z)));
  }
  return out;
}

std::vector<Tensor> interpolation_set(const Tensor& z_start, const Tensor& z_end, std::size_t k) {
  return interpolation_set(InterpolationSpec{z_start, z_end, k});
}

Tensor interpolation_loss(const Tensor& probs) {
  if (!probs.defined() || probs.rank() != 1) {
    throw std::invalid_argument("interpolation_loss: expected a rank-1 probability vector");
  }
  return mean(log(clamp(probs, kProbEps, 1.0 - kProbEps)));
}

std::vector<double> distance_regularization_target(std::size_t k) {
  if (k < 2) throw std::invalid_argument("distance_regularization: k must be >= 2");
  // [1, .., 1, k-1] normalized to sum 1.
  std::vector<double> q(k, 1.0);
  q[k - 1] = static_cast<double>(k - 1);
  const double total = 2.0 * static_cast<double>(k - 1);
  for (auto& v : q) v /= total;
  return q;
}

Tensor consecutive_distance_vector(const std::vector<Tensor>& interp_features, std::size_t k) {
  if (k < 2) throw std::invalid_argument("distance_regularization: k must be >= 2");
  if (interp_features.size() != k) {
    throw std::invalid_argument("distance_regularization: expected " + std::to_string(k) +
                                " feature maps, got " + std::to_string(interp_features.size()));
  }
  const Shape& shape = interp_features[0].shape();
  if (shape.size() != 3) {
    throw std::invalid_argument("distance_regularization: expected {c,h,w} features, got " +
                                shape_str(shape));
  }
  for (const auto& f : interp_features) {
    if (f.shape() != shape) {
      throw std::invalid_argument("distance_regularization: feature shape mismatch " +
                                  shape_str(shape) + " vs " + shape_str(f.shape()));
    }
  }
  const std::size_t oh = (shape[1] + 3) / 4;
  const std::size_t ow = (shape[2] + 3) / 4;
  std::vector<Tensor> pooled;
  pooled.reserve(k);
  for (const auto& f : interp_features) pooled.push_back(adaptive_avg_pool2d(f, oh, ow));

  std::vector<Tensor> dists;
  dists.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    dists.push_back(l2_norm(sub(pooled[i], pooled[(i + 1) % k])));
  }
  return concat(dists, 0);  // {k}
}

Tensor distance_regularization_from_distances(const Tensor& distances) {
  if (!distances.defined() || distances.rank() != 1 || distances.size() < 2) {
    throw std::invalid_argument("distance_regularization: expected a {k>=2} distance vector");
  }
  const std::size_t k = distances.size();
  const Tensor log_pred = log_softmax(distances);
  const std::vector<double> q = distance_regularization_target(k);
  std::vector<double> log_q(k);
  for (std::size_t i = 0; i < k; ++i) log_q[i] = std::log(q[i]);
  const Tensor q_t = Tensor::from_data({k}, q);
  const Tensor log_q_t = Tensor::from_data({k}, std::move(log_q));
  return mean(mul(q_t, sub(log_q_t, log_pred)));
}

Tensor distance_regularization(const std::vector<Tensor>& interp_features, std::size_t k) {
  return distance_regularization_from_distances(consecutive_distance_vector(interp_features, k));
}

std::pair<Tensor, Tensor> adversarial_losses(const Tensor& real_probs, const Tensor& fake_probs) {
  if (!real_probs.defined() || !fake_probs.defined() || real_probs.rank() != 1 ||
      fake_probs.rank() != 1) {
    throw std::invalid_argument("adversarial_losses: expected rank-1 probability vectors");
  }
  const Tensor real_c = clamp(real_probs, kProbEps, 1.0 - kProbEps);
  const Tensor fake_c = clamp(fake_probs, kProbEps, 1.0 - kProbEps);
  const Tensor log_fake = mean(log(fake_c));
  const Tensor g_loss = neg(log_fake);
  const Tensor d_loss = add(mean(log(affine_const(real_c, -1.0, 1.0))), log_fake);
  return {g_loss, d_loss};
}

LossReport total_objectives(double l_adv_g, double l_adv_d, double l_inp, double l_dr,
                            double l_g, double lambda1, double lambda2, double lambda3) {
  const std::pair<const char*, double> components[] = {
      {"l_adv_g", l_adv_g}, {"l_adv_d", l_adv_d}, {"l_inp", l_inp},
      {"l_dr", l_dr},       {"l_g", l_g},
  };
  for (const auto& [name, v] : components) {
    if (!std::isfinite(v)) {
      throw std::runtime_error(std::string("total_objectives: non-finite component ") + name);
    }
  }
  if (!std::isfinite(lambda1) || !std::isfinite(lambda2) || !std::isfinite(lambda3)) {
    throw std::runtime_error("total_objectives: non-finite lambda");
  }
  LossReport r;
  r.l_adv_g = l_adv_g;
  r.l_adv_d = l_adv_d;
  r.l_inp = l_inp;
  r.l_dr = l_dr;
  r.l_g = l_g;
  r.lambda1 = lambda1;
  r.lambda2 = lambda2;
  r.lambda3 = lambda3;
  r.total_g = l_adv_g - lambda1 * l_inp + lambda2 * l_dr;
  r.total_d = l_adv_d + lambda1 * l_inp + lambda3 * l_g;
  return r;
}

}  // namespace gsgan
