#pragma once
// Small convolutional generator/discriminator pair with per-layer feature
// taps, sized to train on a CPU in minutes. Image sizes 16 and 32 are
// supported (grayscale).

#include <cstddef>
#include <string>
#include <vector>

#include "gsgan/random.hpp"
#include "gsgan/tensor.hpp"

namespace gsgan {

struct NamedParam {
  std::string name;
  Tensor tensor;
};

// latent {N,d} -> dense 4x4x32 -> (upsample2x + conv3x3 + leaky) stages
// -> conv3x3 + tanh image {N,1,S,S}. The tap is the activation after the
// last stage (the final intermediate feature map before the output conv).
class Generator {
 public:
  Generator(std::size_t latent_dim, std::size_t image_size, RngEngine& init_rng);

  struct Output {
    Tensor images;    // {N,1,S,S}, values in [-1,1]
    Tensor features;  // {N,c,S,S} tap
  };
  Output forward(const Tensor& z) const;

  std::vector<NamedParam> parameters() const;
  std::size_t latent_dim() const { return latent_dim_; }
  std::size_t image_size() const { return image_size_; }
  std::size_t feature_channels() const { return stage_out_channels_.back(); }

 private:
  struct Conv {
    Tensor w, b;
  };
  std::size_t latent_dim_ = 0;
  std::size_t image_size_ = 0;
  std::vector<std::size_t> stage_out_channels_;
  Tensor fc_w_, fc_b_;  // {32*4*4, d}, {32*4*4}
  std::vector<Conv> stages_;
  Conv out_conv_;
};

// image {N,1,S,S} -> (conv3x3 stride2 + leaky) stack -> dense -> sigmoid,
// output clamped into (0,1). Tap l (1-based) is the activation after the
// l-th conv; every tap has even c*h*w.
class Discriminator {
 public:
  Discriminator(std::size_t image_size, RngEngine& init_rng);

  struct Output {
    Tensor probs;  // {N}
    std::vector<std::pair<int, Tensor>> taps;  // (layer id, {N,c,h,w})
    Tensor penultimate;  // {N, flat} features before the dense head
  };
  Output forward(const Tensor& images) const;

  std::vector<NamedParam> parameters() const;
  std::size_t image_size() const { return image_size_; }
  std::vector<int> conv_layer_ids() const;

 private:
  struct Conv {
    Tensor w, b;
  };
  std::size_t image_size_ = 0;
  std::vector<std::size_t> conv_out_channels_;
  std::vector<Conv> convs_;
  Tensor fc_w_, fc_b_;  // {1, flat}, {1}
};

// He fan-in normal initializer used by both networks.
Tensor he_init(const Shape& shape, std::size_t fan_in, RngEngine& rng);

// {N,d} batch of standard-normal latents.
Tensor sample_latents(std::size_t n, std::size_t dim, RngEngine& rng);

}  // namespace gsgan
