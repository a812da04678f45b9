#include "gsgan/gradsuite.hpp"

#include <stdexcept>

#include "gsgan/augment.hpp"
#include "gsgan/losses.hpp"
#include "gsgan/nets.hpp"
#include "gsgan/random.hpp"

namespace gsgan {

namespace {

constexpr std::size_t kImageSize = 16;
constexpr std::size_t kLatentDim = 32;
constexpr std::size_t kBatch = 3;
constexpr std::size_t kInterp = 4;
constexpr double kL1 = 0.8, kL2 = 1.25, kL3 = 0.8;

struct Fixture {
  std::unique_ptr<Generator> g;
  std::unique_ptr<Discriminator> d;
  Tensor real;            // {B,1,S,S} constants in [-1,1]
  Tensor z;               // {B,latent}
  Tensor z_interp;        // {k,latent}
  Tensor fake_const;      // G(z) detached
  Tensor interp_const;    // G(z_interp) detached
  Tensor anchor_const;    // G(zbar) detached
  Tensor zbar;            // {latent}
  WeightVector omega;
  std::vector<int> tap_ids;

  std::vector<std::pair<std::string, Tensor>> g_params() const {
    std::vector<std::pair<std::string, Tensor>> out;
    for (const auto& p : g->parameters()) out.emplace_back(p.name, p.tensor);
    return out;
  }
  std::vector<std::pair<std::string, Tensor>> d_params() const {
    std::vector<std::pair<std::string, Tensor>> out;
    for (const auto& p : d->parameters()) out.emplace_back(p.name, p.tensor);
    return out;
  }
  std::vector<std::pair<std::string, Tensor>> all_params() const {
    auto out = g_params();
    for (auto& p : d_params()) out.push_back(std::move(p));
    return out;
  }
};

Fixture make_fixture(std::uint64_t seed) {
  Fixture f;
  RngEngine init_rng(seed_stream(seed, 0));
  f.g = std::make_unique<Generator>(kLatentDim, kImageSize, init_rng);
  f.d = std::make_unique<Discriminator>(kImageSize, init_rng);

  RngEngine data_rng(seed_stream(seed, 1));
  std::vector<double> real(kBatch * kImageSize * kImageSize);
  for (auto& v : real) v = 2.0 * uniform01(data_rng) - 1.0;
  f.real = Tensor::from_data({kBatch, 1, kImageSize, kImageSize}, std::move(real));
  f.z = sample_latents(kBatch, kLatentDim, data_rng);

  const Tensor za = reshape(sample_latents(1, kLatentDim, data_rng), {kLatentDim});
  const Tensor zb = reshape(sample_latents(1, kLatentDim, data_rng), {kLatentDim});
  const auto zs = interpolation_set(za, zb, kInterp);
  std::vector<double> flat;
  for (const auto& zi : zs) flat.insert(flat.end(), zi.data().begin(), zi.data().end());
  f.z_interp = Tensor::from_data({kInterp, kLatentDim}, std::move(flat));

  f.omega = sample_dirichlet(kBatch, 1.0, data_rng);
  std::vector<Tensor> rows;
  for (std::size_t i = 0; i < kBatch; ++i) {
    rows.push_back(reshape(slice(f.z, 0, i, 1), {kLatentDim}));
  }
  f.zbar = anchor_latent(rows, f.omega);

  {
    NoGradGuard ng;
    f.fake_const = f.g->forward(f.z).images;
    f.interp_const = f.g->forward(f.z_interp).images;
    f.anchor_const = f.g->forward(reshape(f.zbar, {1, kLatentDim})).images;
  }

  const auto ids = f.d->conv_layer_ids();
  f.tap_ids.assign(ids.end() - 2, ids.end());
  return f;
}

std::vector<FeatureStack> stacks_from_taps(const std::vector<std::pair<int, Tensor>>& taps,
                                           const std::vector<int>& tap_ids) {
  const std::size_t n = taps.front().second.shape()[0];
  std::vector<FeatureStack> stacks(n);
  for (const auto& [id, batched] : taps) {
    bool keep = false;
    for (int want : tap_ids) keep = keep || want == id;
    if (!keep) continue;
    const Shape& s = batched.shape();
    for (std::size_t i = 0; i < n; ++i) {
      stacks[i].layers.push_back({id, reshape(slice(batched, 0, i, 1), {s[1], s[2], s[3]})});
    }
  }
  return stacks;
}

Tensor lg_loss(const Fixture& f) {
  const auto d_real = f.d->forward(f.real);
  const auto stacks = stacks_from_taps(d_real.taps, f.tap_ids);
  const PseudoSourceBatch pseudo = pseudo_source_features(stacks, f.omega);
  const auto d_anchor = f.d->forward(f.anchor_const);
  const TargetFeatureBatch target =
      target_features(stacks_from_taps(d_anchor.taps, f.tap_ids).front(), f.zbar);
  return geodesic_scc_loss(pseudo, target);
}

Tensor ldr_loss(const Fixture& f) {
  const auto g_out = f.g->forward(f.z_interp);
  const Shape& s = g_out.features.shape();
  std::vector<Tensor> feats;
  for (std::size_t i = 0; i < kInterp; ++i) {
    feats.push_back(reshape(slice(g_out.features, 0, i, 1), {s[1], s[2], s[3]}));
  }
  return distance_regularization(feats, kInterp);
}

Tensor linp_loss(const Fixture& f) {
  return interpolation_loss(f.d->forward(f.g->forward(f.z_interp).images).probs);
}

Tensor adv_g_loss(const Fixture& f) {
  const Tensor probs = f.d->forward(f.g->forward(f.z).images).probs;
  return neg(mean(log(clamp(probs, kProbEps, 1.0 - kProbEps))));
}

Tensor adv_d_loss(const Fixture& f) {
  const auto d_real = f.d->forward(f.real);
  const auto d_fake = f.d->forward(f.fake_const);
  return adversarial_losses(d_real.probs, d_fake.probs).second;
}

Tensor total_g_loss(const Fixture& f) {
  return add(add(adv_g_loss(f), scale(linp_loss(f), -kL1)), scale(ldr_loss(f), kL2));
}

Tensor total_d_loss(const Fixture& f) {
  const Tensor l_inp = interpolation_loss(f.d->forward(f.interp_const).probs);
  return add(add(adv_d_loss(f), scale(l_inp, kL1)), scale(lg_loss(f), kL3));
}

}  // namespace

GradTarget parse_grad_target(const std::string& name) {
  if (name == "lg") return GradTarget::lg;
  if (name == "ldr") return GradTarget::ldr;
  if (name == "linp") return GradTarget::linp;
  if (name == "adv") return GradTarget::adv;
  if (name == "total") return GradTarget::total;
  if (name == "all") return GradTarget::all;
  throw std::invalid_argument("unknown gradcheck target '" + name +
                              "' (want lg|ldr|linp|adv|total|all)");
}

std::vector<GradSuiteResult> run_gradient_suite(GradTarget target, std::uint64_t seed) {
  const Fixture f = make_fixture(seed);
  GradCheckOptions opt;
  opt.seed = seed + 1;

  std::vector<GradSuiteResult> results;
  const bool all = target == GradTarget::all;
  auto want = [&](GradTarget t) { return all || target == t; };

  if (want(GradTarget::lg)) {
    results.push_back({"lg/d", finite_diff_check([&] { return lg_loss(f); }, f.d_params(), opt)});
  }
  if (want(GradTarget::ldr)) {
    results.push_back({"ldr/g", finite_diff_check([&] { return ldr_loss(f); }, f.g_params(), opt)});
  }
  if (want(GradTarget::linp)) {
    results.push_back(
        {"linp/gd", finite_diff_check([&] { return linp_loss(f); }, f.all_params(), opt)});
  }
  if (want(GradTarget::adv)) {
    results.push_back(
        {"adv_g/gd", finite_diff_check([&] { return adv_g_loss(f); }, f.all_params(), opt)});
    results.push_back(
        {"adv_d/d", finite_diff_check([&] { return adv_d_loss(f); }, f.d_params(), opt)});
  }
  if (want(GradTarget::total)) {
    results.push_back(
        {"total_g/g", finite_diff_check([&] { return total_g_loss(f); }, f.g_params(), opt)});
    results.push_back(
        {"total_d/d", finite_diff_check([&] { return total_d_loss(f); }, f.d_params(), opt)});
  }
  return results;
}

}  // namespace gsgan
