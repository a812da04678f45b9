#include "gsgan/augment.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace gsgan {

namespace {

void require_layer_match(const char* op, int id_a, const Shape& sa, int id_b, const Shape& sb) {
  if (id_a != id_b || sa != sb) {
    throw std::invalid_argument(std::string(op) + ": layer mismatch, id " + std::to_string(id_a) +
                                " " + shape_str(sa) + " vs id " + std::to_string(id_b) + " " +
                                shape_str(sb));
  }
}

void require_chw(const char* op, const Tensor& feature) {
  if (!feature.defined() || feature.rank() != 3) {
    throw std::invalid_argument(std::string(op) + ": expected a {c,h,w} feature, got " +
                                (feature.defined() ? shape_str(feature.shape()) : "undefined"));
  }
}

}  // namespace

WeightVector sample_dirichlet(std::size_t n, double alpha, RngEngine& rng) {
  return WeightVector{dirichlet_sample(rng, n, alpha)};
}

Tensor anchor_latent(const std::vector<Tensor>& latents, const WeightVector& omega) {
  if (latents.empty() || latents.size() != omega.weights.size()) {
    throw std::invalid_argument("anchor_latent: " + std::to_string(latents.size()) +
                                " latents vs " + std::to_string(omega.weights.size()) +
                                " weights");
  }
  double total = 0.0;
  for (double w : omega.weights) total += w;
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("anchor_latent: weights must sum to 1, got " +
                                std::to_string(total));
  }
  const Shape& shape = latents[0].shape();
  std::vector<double> out(latents[0].size(), 0.0);
  for (std::size_t i = 0; i < latents.size(); ++i) {
    if (latents[i].shape() != shape) {
      throw std::invalid_argument("anchor_latent: latent shape mismatch " + shape_str(shape) +
                                  " vs " + shape_str(latents[i].shape()));
    }
    const auto& zi = latents[i].data();
    const double w = omega.weights[i];
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += w * zi[c];
  }
  return Tensor::from_data(shape, std::move(out));
}

PseudoSourceBatch pseudo_source_features(const std::vector<FeatureStack>& real_features,
                                         const WeightVector& omega) {
  if (real_features.empty()) {
    throw std::invalid_argument("pseudo_source_features: empty feature batch");
  }
  if (real_features.size() != omega.weights.size()) {
    throw std::invalid_argument("pseudo_source_features: " +
                                std::to_string(real_features.size()) + " stacks vs " +
                                std::to_string(omega.weights.size()) + " weights");
  }
  const auto& ref = real_features[0].layers;
  for (const auto& stack : real_features) {
    if (stack.layers.size() != ref.size()) {
      throw std::invalid_argument("pseudo_source_features: stacks disagree on layer count");
    }
    for (std::size_t l = 0; l < ref.size(); ++l) {
      require_layer_match("pseudo_source_features", ref[l].id, ref[l].feature.shape(),
                          stack.layers[l].id, stack.layers[l].feature.shape());
    }
  }

  PseudoSourceBatch batch;
  batch.omega = omega;
  for (std::size_t l = 0; l < ref.size(); ++l) {
    std::vector<PreShape> taus;
    taus.reserve(real_features.size());
    for (const auto& stack : real_features) {
      try {
        taus.push_back(project_preshape(stack.layers[l].feature));
      } catch (const std::runtime_error& e) {
        throw std::runtime_error(std::string(e.what()) + " (layer " + std::to_string(ref[l].id) +
                                 ")");
      }
    }
    PreShape surf = geodesic_surface_point(taus, omega);
    PseudoSourceBatch::Layer layer;
    layer.id = ref[l].id;
    layer.feature_shape = ref[l].feature.shape();
    layer.feature = preshape_to_feature(surf, layer.feature_shape);
    layer.preshape = std::move(surf);
    batch.layers.push_back(std::move(layer));
  }
  return batch;
}

TargetFeatureBatch target_features(const FeatureStack& anchor_stack, const Tensor& anchor) {
  TargetFeatureBatch batch;
  batch.anchor_latent = anchor;
  for (const auto& layer : anchor_stack.layers) {
    require_chw("target_features", layer.feature);
    TargetFeatureBatch::Layer out;
    out.id = layer.id;
    out.feature_shape = layer.feature.shape();
    try {
      out.preshape = project_preshape(layer.feature);
    } catch (const std::runtime_error& e) {
      throw std::runtime_error(std::string(e.what()) + " (layer " + std::to_string(layer.id) +
                               ")");
    }
    out.feature = preshape_to_feature(out.preshape, out.feature_shape);
    batch.layers.push_back(std::move(out));
  }
  return batch;
}

SelfCorrMatrix self_correlation_map(const Tensor& feature) {
  require_chw("self_correlation_map", feature);
  const std::size_t c = feature.shape()[0];
  const std::size_t h = feature.shape()[1];
  const std::size_t w = feature.shape()[2];
  SelfCorrMatrix out;
  out.h = h;
  out.w = w;
  // {c,h,w} -> {c, h*w}: column j is the c-vector at spatial position j.
  out.values = self_correlation(reshape(feature, {c, h * w}), &out.degenerate_positions);
  return out;
}

Tensor geodesic_scc_loss(const PseudoSourceBatch& pseudo, const TargetFeatureBatch& target,
                         std::size_t* degenerate_positions) {
  if (pseudo.layers.empty() || pseudo.layers.size() != target.layers.size()) {
    throw std::invalid_argument("geodesic_scc_loss: layer mismatch, " +
                                std::to_string(pseudo.layers.size()) + " pseudo vs " +
                                std::to_string(target.layers.size()) + " target layers");
  }
  std::size_t degenerate = 0;
  Tensor acc;
  for (std::size_t l = 0; l < pseudo.layers.size(); ++l) {
    const auto& ps = pseudo.layers[l];
    const auto& tg = target.layers[l];
    require_layer_match("geodesic_scc_loss", ps.id, ps.feature_shape, tg.id, tg.feature_shape);
    SelfCorrMatrix cs = self_correlation_map(ps.feature);
    SelfCorrMatrix ct = self_correlation_map(tg.feature);
    degenerate += cs.degenerate_positions + ct.degenerate_positions;
    Tensor term = mean(smooth_l1(cs.values, ct.values));
    acc = acc.defined() ? add(acc, term) : term;
  }
  if (degenerate_positions) *degenerate_positions = degenerate;
  return scale(acc, 1.0 / static_cast<double>(pseudo.layers.size()));
}

}  // namespace gsgan
