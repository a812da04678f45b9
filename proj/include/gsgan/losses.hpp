#pragma once
// Training losses: latent interpolation supervision, consecutive-distance
// regularization of interpolated features, the adversarial pair, and the
// combined generator/discriminator objectives.

#include <cstddef>
#include <utility>
#include <vector>

#include "gsgan/tensor.hpp"

namespace gsgan {

// Probabilities are clamped into [kProbEps, 1 - kProbEps] before every log.
inline constexpr double kProbEps = 1e-7;

struct InterpolationSpec {
  Tensor z_start;  // {d}
  Tensor z_end;    // {d}
  std::size_t k = 0;
};

// k evenly spaced latents, endpoints exact: z_i = (1 - t) z_start + t z_end.
std::vector<Tensor> interpolation_set(const InterpolationSpec& spec);
std::vector<Tensor> interpolation_set(const Tensor& z_start, const Tensor& z_end, std::size_t k);

// Mean of log(p) over discriminator outputs on the interpolated images.
Tensor interpolation_loss(const Tensor& probs /* {k} */);

// Pool each feature to {c, ceil(h/4), ceil(w/4)}, take cyclic consecutive L2
// distances (k of them, wrapping last->first), and score log_softmax(dist)
// against the normalized [1, .., 1, k-1] target with a mean-reduced
// KL divergence: mean_i q_i (log q_i - log_softmax(dist)_i).
Tensor distance_regularization(const std::vector<Tensor>& interp_features, std::size_t k);

// The two stages of the regularizer, exposed separately: the pooled cyclic
// distance vector {k}, and the KL score of an arbitrary distance vector.
Tensor consecutive_distance_vector(const std::vector<Tensor>& interp_features, std::size_t k);
Tensor distance_regularization_from_distances(const Tensor& distances);

// The fixed target distribution of the distance regularizer.
std::vector<double> distance_regularization_target(std::size_t k);

// (generator loss, discriminator loss):
//   g = -mean log D(G(z));  d = mean log(1 - D(x)) + mean log D(G(z)).
std::pair<Tensor, Tensor> adversarial_losses(const Tensor& real_probs, const Tensor& fake_probs);

struct LossReport {
  double l_adv_g = 0.0;
  double l_adv_d = 0.0;
  double l_inp = 0.0;
  double l_dr = 0.0;
  double l_g = 0.0;
  double total_g = 0.0;  // l_adv_g - lambda1*l_inp + lambda2*l_dr
  double total_d = 0.0;  // l_adv_d + lambda1*l_inp + lambda3*l_g
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double lambda3 = 0.0;
};

// Combine components into a report; throws naming the first non-finite one.
LossReport total_objectives(double l_adv_g, double l_adv_d, double l_inp, double l_dr,
                            double l_g, double lambda1, double lambda2, double lambda3);

}  // namespace gsgan
