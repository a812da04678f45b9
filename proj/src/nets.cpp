#include "gsgan/nets.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "gsgan/losses.hpp"

namespace gsgan {

namespace {

constexpr double kLeakySlope = 0.2;
constexpr std::size_t kBaseSpatial = 4;
constexpr std::size_t kBaseChannels = 32;

void require_image_size(std::size_t image_size) {
  if (image_size != 16 && image_size != 32) {
    throw std::invalid_argument("image size must be 16 or 32, got " + std::to_string(image_size));
  }
}

}  // namespace

Tensor he_init(const Shape& shape, std::size_t fan_in, RngEngine& rng) {
  const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  std::vector<double> data(n);
  for (auto& v : data) v = stddev * normal_sample(rng);
  return Tensor::from_data(shape, std::move(data), true);
}

Tensor sample_latents(std::size_t n, std::size_t dim, RngEngine& rng) {
  std::vector<double> data(n * dim);
  for (auto& v : data) v = normal_sample(rng);
  return Tensor::from_data({n, dim}, std::move(data));
}

// ---- Generator ----

Generator::Generator(std::size_t latent_dim, std::size_t image_size, RngEngine& init_rng)
    : latent_dim_(latent_dim), image_size_(image_size) {
  require_image_size(image_size);
  if (latent_dim == 0) throw std::invalid_argument("latent_dim must be positive");

  const std::size_t dense_out = kBaseChannels * kBaseSpatial * kBaseSpatial;
  fc_w_ = he_init({dense_out, latent_dim}, latent_dim, init_rng);
  fc_b_ = Tensor::zeros({dense_out}, true);

  std::size_t in_ch = kBaseChannels;
  for (std::size_t s = kBaseSpatial; s < image_size; s *= 2) {
    const std::size_t out_ch = std::max<std::size_t>(8, in_ch / 2);
    Conv c;
    c.w = he_init({out_ch, in_ch, 3, 3}, in_ch * 9, init_rng);
    c.b = Tensor::zeros({out_ch}, true);
    stages_.push_back(std::move(c));
    stage_out_channels_.push_back(out_ch);
    in_ch = out_ch;
  }
  out_conv_.w = he_init({1, in_ch, 3, 3}, in_ch * 9, init_rng);
  out_conv_.b = Tensor::zeros({1}, true);
}

Generator::Output Generator::forward(const Tensor& z) const {
  if (!z.defined() || z.rank() != 2 || z.shape()[1] != latent_dim_) {
    throw std::invalid_argument("generator: wrong latent dim, expected {N, " +
                                std::to_string(latent_dim_) + "}, got " +
                                (z.defined() ? shape_str(z.shape()) : "undefined"));
  }
  const std::size_t n = z.shape()[0];
  Tensor h = leaky_relu(affine(z, fc_w_, fc_b_), kLeakySlope);
  h = reshape(h, {n, kBaseChannels, kBaseSpatial, kBaseSpatial});
  for (const auto& stage : stages_) {
    h = upsample_nearest2x(h);
    h = leaky_relu(conv2d(h, stage.w, stage.b, 1, 1), kLeakySlope);
  }
  Output out;
  out.features = h;
  out.images = tanh(conv2d(h, out_conv_.w, out_conv_.b, 1, 1));
  return out;
}

std::vector<NamedParam> Generator::parameters() const {
  std::vector<NamedParam> p;
  p.push_back({"g.fc.w", fc_w_});
  p.push_back({"g.fc.b", fc_b_});
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    p.push_back({"g.stage" + std::to_string(i) + ".w", stages_[i].w});
    p.push_back({"g.stage" + std::to_string(i) + ".b", stages_[i].b});
  }
  p.push_back({"g.out.w", out_conv_.w});
  p.push_back({"g.out.b", out_conv_.b});
  return p;
}

// ---- Discriminator ----

Discriminator::Discriminator(std::size_t image_size, RngEngine& init_rng)
    : image_size_(image_size) {
  require_image_size(image_size);
  std::size_t in_ch = 1;
  std::size_t out_ch = 8;
  for (std::size_t s = image_size; s > kBaseSpatial; s /= 2) {
    Conv c;
    c.w = he_init({out_ch, in_ch, 3, 3}, in_ch * 9, init_rng);
    c.b = Tensor::zeros({out_ch}, true);
    convs_.push_back(std::move(c));
    conv_out_channels_.push_back(out_ch);
    in_ch = out_ch;
    out_ch *= 2;
  }
  const std::size_t flat = in_ch * kBaseSpatial * kBaseSpatial;
  fc_w_ = he_init({1, flat}, flat, init_rng);
  fc_b_ = Tensor::zeros({1}, true);
}

Discriminator::Output Discriminator::forward(const Tensor& images) const {
  if (!images.defined() || images.rank() != 4 || images.shape()[1] != 1 ||
      images.shape()[2] != image_size_ || images.shape()[3] != image_size_) {
    throw std::invalid_argument("discriminator: expected images {N, 1, " +
                                std::to_string(image_size_) + ", " + std::to_string(image_size_) +
                                "}, got " +
                                (images.defined() ? shape_str(images.shape()) : "undefined"));
  }
  const std::size_t n = images.shape()[0];
  Output out;
  Tensor h = images;
  int layer_id = 1;
  for (const auto& conv : convs_) {
    h = leaky_relu(conv2d(h, conv.w, conv.b, 2, 1), kLeakySlope);
    out.taps.emplace_back(layer_id++, h);
  }
  const std::size_t flat = h.shape()[1] * h.shape()[2] * h.shape()[3];
  out.penultimate = reshape(h, {n, flat});
  const Tensor logits = affine(out.penultimate, fc_w_, fc_b_);  // {n,1}
  out.probs = reshape(clamp(sigmoid(logits), kProbEps, 1.0 - kProbEps), {n});
  return out;
}

std::vector<NamedParam> Discriminator::parameters() const {
  std::vector<NamedParam> p;
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    p.push_back({"d.conv" + std::to_string(i) + ".w", convs_[i].w});
    p.push_back({"d.conv" + std::to_string(i) + ".b", convs_[i].b});
  }
  p.push_back({"d.fc.w", fc_w_});
  p.push_back({"d.fc.b", fc_b_});
  return p;
}

std::vector<int> Discriminator::conv_layer_ids() const {
  std::vector<int> ids;
  for (std::size_t i = 0; i < convs_.size(); ++i) ids.push_back(static_cast<int>(i) + 1);
  return ids;
}

}  // namespace gsgan
