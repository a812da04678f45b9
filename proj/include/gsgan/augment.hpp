#pragma once
// Pseudo-source construction: Dirichlet barycentric weights, the matching
// anchor latent, per-layer geodesic-surface features built from a batch of
// real-image discriminator features, spatial self-correlation matrices, and
// the geodesic self-correlation consistency loss that aligns them.

#include <cstddef>
#include <vector>

#include "gsgan/preshape.hpp"
#include "gsgan/random.hpp"
#include "gsgan/tensor.hpp"

namespace gsgan {

// Ordered per-layer feature maps from one sample; ids strictly increasing.
struct FeatureLayer {
  int id = 0;
  Tensor feature;  // {c, h, w}
};
struct FeatureStack {
  std::vector<FeatureLayer> layers;
};

// All-pairs cosine similarities between spatial position vectors.
struct SelfCorrMatrix {
  Tensor values;  // {h*w, h*w}
  std::size_t h = 0;
  std::size_t w = 0;
  std::size_t degenerate_positions = 0;  // zero-norm columns, similarities forced to 0
};

struct PseudoSourceBatch {
  struct Layer {
    int id = 0;
    Shape feature_shape;  // {c, h, w}
    PreShape preshape;
    Tensor feature;  // preshape laid back out as {c, h, w}
  };
  std::vector<Layer> layers;
  WeightVector omega;
};

struct TargetFeatureBatch {
  struct Layer {
    int id = 0;
    Shape feature_shape;
    PreShape preshape;
    Tensor feature;
  };
  std::vector<Layer> layers;
  Tensor anchor_latent;  // {d}, informational
};

// n weights summing to 1, deterministic for a fixed engine state.
WeightVector sample_dirichlet(std::size_t n, double alpha, RngEngine& rng);

// Componentwise convex combination of the latents under omega (sum ~ 1).
Tensor anchor_latent(const std::vector<Tensor>& latents, const WeightVector& omega);

// For every layer: project each sample's feature map, take the weighted
// geodesic surface point across samples, and lay it back out as {c, h, w}.
PseudoSourceBatch pseudo_source_features(const std::vector<FeatureStack>& real_features,
                                         const WeightVector& omega);

// Project the anchor-image feature stack the same way (single sample).
TargetFeatureBatch target_features(const FeatureStack& anchor_stack, const Tensor& anchor);

SelfCorrMatrix self_correlation_map(const Tensor& feature /* {c,h,w} */);

// Mean over layers of the mean elementwise smooth-l1 distance between the two
// self-correlation matrices. degenerate_positions, when non-null, receives
// the total zero-norm position count across both sides.
Tensor geodesic_scc_loss(const PseudoSourceBatch& pseudo, const TargetFeatureBatch& target,
                         std::size_t* degenerate_positions = nullptr);

}  // namespace gsgan
