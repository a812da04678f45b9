#include "gsgan/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gsgan {

namespace fs = std::filesystem;

namespace {

constexpr int kManifestVersion = 1;
constexpr std::size_t kEvalPaths = 8;
constexpr std::size_t kEvalK = 8;

bool parse_bool(const std::string& v) {
  if (v == "1" || v == "true" || v == "on") return true;
  if (v == "0" || v == "false" || v == "off") return false;
  throw std::invalid_argument("expected boolean (0/1/true/false), got '" + v + "'");
}

std::vector<int> parse_int_list(const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  return out;
}

std::string losses_csv_header() {
  return "step,l_adv_g,l_adv_d,l_inp,l_dr,l_g,total_g,total_d";
}

std::string losses_csv_row(std::size_t step, const LossReport& r) {
  std::ostringstream os;
  os << step << "," << fmt_g17(r.l_adv_g) << "," << fmt_g17(r.l_adv_d) << ","
     << fmt_g17(r.l_inp) << "," << fmt_g17(r.l_dr) << "," << fmt_g17(r.l_g) << ","
     << fmt_g17(r.total_g) << "," << fmt_g17(r.total_d);
  return os.str();
}

std::string metrics_csv_header() {
  return "step,l_adv_g,l_adv_d,l_inp,l_dr,l_g,diversity,ffd,smoothness";
}

std::string metrics_csv_row(const MetricsRow& m) {
  std::ostringstream os;
  os << m.step << "," << fmt_g17(m.l_adv_g) << "," << fmt_g17(m.l_adv_d) << ","
     << fmt_g17(m.l_inp) << "," << fmt_g17(m.l_dr) << "," << fmt_g17(m.l_g) << ","
     << fmt_g17(m.pairwise_diversity) << "," << fmt_g17(m.ffd) << "," << fmt_g17(m.smoothness);
  return os.str();
}

std::string ckpt_dir_name(std::size_t step) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "ckpt-%06zu", step);
  return buf;
}

Tensor latent_row(const Tensor& batch, std::size_t i) {
  return reshape(slice(batch, 0, i, 1), {batch.shape()[1]});
}

}  // namespace

// ---- TrainConfig ----

TrainConfig TrainConfig::from_file(const fs::path& path) {
  TrainConfig cfg;
  for (const auto& [key, value] : read_kv_file(path)) cfg.apply_override(key, value);
  return cfg;
}

void TrainConfig::apply_override(const std::string& key, const std::string& value) {
  try {
    if (key == "lambda1") lambda1 = std::stod(value);
    else if (key == "lambda2") lambda2 = std::stod(value);
    else if (key == "lambda3") lambda3 = std::stod(value);
    else if (key == "batch_size") batch_size = std::stoul(value);
    else if (key == "interp_size") interp_size = std::stoul(value);
    else if (key == "steps") steps = std::stoul(value);
    else if (key == "lr_g") lr_g = std::stod(value);
    else if (key == "lr_d") lr_d = std::stod(value);
    else if (key == "adam_beta1") adam_beta1 = std::stod(value);
    else if (key == "adam_beta2") adam_beta2 = std::stod(value);
    else if (key == "dirichlet_alpha") dirichlet_alpha = std::stod(value);
    else if (key == "tap_layers") tap_layers = parse_int_list(value);
    else if (key == "seed") seed = std::stoull(value);
    else if (key == "dataset") dataset_dir = value;
    else if (key == "out_dir") out_dir = value;
    else if (key == "checkpoint_every") checkpoint_every = std::stoul(value);
    else if (key == "eval_every") eval_every = std::stoul(value);
    else if (key == "fags_on") fags_on = parse_bool(value);
    else if (key == "iandr_on") iandr_on = parse_bool(value);
    else if (key == "image_size") image_size = std::stoul(value);
    else if (key == "latent_dim") latent_dim = std::stoul(value);
    else if (key == "eval_samples") eval_samples = std::stoul(value);
    else if (key == "resume") resume = value;
    else throw std::invalid_argument("unknown config key '" + key + "'");
  } catch (const std::invalid_argument& e) {
    if (std::string(e.what()).rfind("unknown config key", 0) == 0) throw;
    throw std::invalid_argument("bad value for config key '" + key + "': " + value);
  }
}

void TrainConfig::validate() const {
  if (lambda1 < 0 || lambda2 < 0 || lambda3 < 0) {
    throw std::invalid_argument("config: lambdas must be >= 0");
  }
  if (batch_size < 1) throw std::invalid_argument("config: batch_size must be >= 1");
  if (interp_size < 2) throw std::invalid_argument("config: interp_size must be >= 2");
  if (!(dirichlet_alpha > 0)) throw std::invalid_argument("config: dirichlet_alpha must be > 0");
  if (checkpoint_every == 0 || eval_every == 0) {
    throw std::invalid_argument("config: cadences must be >= 1");
  }
  if (eval_samples < 2) throw std::invalid_argument("config: eval_samples must be >= 2");
}

// ---- Adam ----

void adam_step(std::vector<NamedParam>& params, AdamState& state, const AdamParams& hp) {
  if (state.m.size() != params.size()) {
    state.m.resize(params.size());
    state.v.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.m[i].assign(params[i].tensor.size(), 0.0);
      state.v[i].assign(params[i].tensor.size(), 0.0);
    }
  }
  state.t += 1;
  const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& data = params[i].tensor.data();
    const auto& grad = params[i].tensor.grad();
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t j = 0; j < data.size(); ++j) {
      const double g = grad[j];
      m[j] = hp.beta1 * m[j] + (1.0 - hp.beta1) * g;
      v[j] = hp.beta2 * v[j] + (1.0 - hp.beta2) * g * g;
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      data[j] -= hp.lr * mhat / (std::sqrt(vhat) + hp.eps);
    }
  }
}

std::vector<std::size_t> draw_batch_indices(RngEngine& rng, std::size_t dataset_size,
                                            std::size_t batch_size) {
  std::vector<std::size_t> idx(batch_size);
  for (auto& i : idx) i = uniform_index(rng, dataset_size);
  return idx;
}

// ---- Trainer ----

Trainer::Trainer(TrainConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  if (cfg_.dataset_dir.empty()) throw std::invalid_argument("config: dataset path is required");
  dataset_ = load_dataset(cfg_.dataset_dir);
  if (dataset_.height != cfg_.image_size || dataset_.width != cfg_.image_size) {
    throw std::runtime_error("dataset images are " + std::to_string(dataset_.width) + "x" +
                             std::to_string(dataset_.height) + " but config image_size is " +
                             std::to_string(cfg_.image_size));
  }
  if (!cfg_.resume.empty()) {
    load_checkpoint(cfg_.resume);
  } else {
    init_networks();
  }
}

void Trainer::init_networks() {
  RngEngine init_rng(seed_stream(cfg_.seed, 0));
  g_ = std::make_unique<Generator>(cfg_.latent_dim, cfg_.image_size, init_rng);
  d_ = std::make_unique<Discriminator>(cfg_.image_size, init_rng);
  g_params_ = g_->parameters();
  d_params_ = d_->parameters();
  adam_g_ = AdamState{};
  adam_d_ = AdamState{};
  rng_ = RngEngine(seed_stream(cfg_.seed, 1));
  step_ = 0;

  tap_ids_ = cfg_.tap_layers;
  const auto ids = d_->conv_layer_ids();
  if (tap_ids_.empty()) {
    // default: the last two convolutional feature maps
    const std::size_t n = ids.size();
    tap_ids_.assign(ids.begin() + (n > 2 ? n - 2 : 0), ids.end());
  }
  for (int id : tap_ids_) {
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) {
      throw std::invalid_argument("config: tap layer " + std::to_string(id) +
                                  " does not exist in the discriminator");
    }
  }
}

Tensor Trainer::make_batch(const std::vector<std::size_t>& indices) const {
  return dataset_.batch(indices);
}

std::vector<FeatureStack> Trainer::per_sample_stacks(
    const std::vector<std::pair<int, Tensor>>& taps) const {
  const std::size_t n = taps.front().second.shape()[0];
  std::vector<FeatureStack> stacks(n);
  for (const auto& [id, batched] : taps) {
    if (std::find(tap_ids_.begin(), tap_ids_.end(), id) == tap_ids_.end()) continue;
    const Shape& s = batched.shape();  // {n,c,h,w}
    for (std::size_t i = 0; i < n; ++i) {
      Tensor f = reshape(slice(batched, 0, i, 1), {s[1], s[2], s[3]});
      stacks[i].layers.push_back({id, std::move(f)});
    }
  }
  return stacks;
}

LossReport Trainer::train_step() {
  const std::size_t B = cfg_.batch_size;
  const std::size_t k = cfg_.interp_size;

  // Per-step draws, in a fixed order: batch indices, latents, Dirichlet
  // weights, interpolation endpoints.
  const std::vector<std::size_t> idx = draw_batch_indices(rng_, dataset_.images.size(), B);
  const Tensor real = make_batch(idx);
  const Tensor z = sample_latents(B, cfg_.latent_dim, rng_);
  WeightVector omega;
  if (cfg_.fags_on) omega = sample_dirichlet(B, cfg_.dirichlet_alpha, rng_);
  Tensor z_interp_batch;
  if (cfg_.iandr_on) {
    const Tensor z_a = reshape(sample_latents(1, cfg_.latent_dim, rng_), {cfg_.latent_dim});
    const Tensor z_b = reshape(sample_latents(1, cfg_.latent_dim, rng_), {cfg_.latent_dim});
    const std::vector<Tensor> z_interp = interpolation_set(z_a, z_b, k);
    std::vector<double> flat;
    flat.reserve(k * cfg_.latent_dim);
    for (const auto& zi : z_interp) {
      flat.insert(flat.end(), zi.data().begin(), zi.data().end());
    }
    z_interp_batch = Tensor::from_data({k, cfg_.latent_dim}, std::move(flat));
  }

  // Generator outputs consumed by the discriminator update are constants.
  Tensor fake_images, interp_images, anchor_image, zbar;
  {
    NoGradGuard ng;
    fake_images = g_->forward(z).images;
    if (cfg_.iandr_on) interp_images = g_->forward(z_interp_batch).images;
    if (cfg_.fags_on) {
      std::vector<Tensor> rows;
      rows.reserve(B);
      for (std::size_t i = 0; i < B; ++i) rows.push_back(latent_row(z, i));
      zbar = anchor_latent(rows, omega);
      anchor_image = g_->forward(reshape(zbar, {1, cfg_.latent_dim})).images;
    }
  }

  // -- discriminator update --
  const auto d_real = d_->forward(real);
  const auto d_fake = d_->forward(fake_images);
  auto [g_adv_unused, l_adv_d_t] = adversarial_losses(d_real.probs, d_fake.probs);
  Tensor total_d_t = l_adv_d_t;
  double l_inp_val = 0.0;
  double l_g_val = 0.0;
  if (cfg_.iandr_on) {
    const Tensor l_inp_t = interpolation_loss(d_->forward(interp_images).probs);
    l_inp_val = l_inp_t.value();
    total_d_t = add(total_d_t, scale(l_inp_t, cfg_.lambda1));
  }
  if (cfg_.fags_on) {
    const auto stacks = per_sample_stacks(d_real.taps);
    const PseudoSourceBatch pseudo = pseudo_source_features(stacks, omega);
    const auto d_anchor = d_->forward(anchor_image);
    const FeatureStack anchor_stack = per_sample_stacks(d_anchor.taps).front();
    const TargetFeatureBatch target = target_features(anchor_stack, zbar);
    const Tensor l_g_t = geodesic_scc_loss(pseudo, target);
    l_g_val = l_g_t.value();
    total_d_t = add(total_d_t, scale(l_g_t, cfg_.lambda3));
  }
  for (auto& p : d_params_) p.tensor.zero_grad();
  for (auto& p : g_params_) p.tensor.zero_grad();
  total_d_t.backward();
  adam_step(d_params_, adam_d_, {cfg_.lr_d, cfg_.adam_beta1, cfg_.adam_beta2});
  const double l_adv_d_val = l_adv_d_t.value();

  // -- generator update (against the updated discriminator) --
  const auto g_out = g_->forward(z);
  Tensor l_adv_g_t = neg(mean(log(clamp(d_->forward(g_out.images).probs, kProbEps,
                                        1.0 - kProbEps))));
  Tensor total_g_t = l_adv_g_t;
  double l_dr_val = 0.0;
  if (cfg_.iandr_on) {
    const auto g_interp = g_->forward(z_interp_batch);
    const Tensor l_inp_g_t = interpolation_loss(d_->forward(g_interp.images).probs);
    total_g_t = add(total_g_t, scale(l_inp_g_t, -cfg_.lambda1));
    const Shape& fs = g_interp.features.shape();
    std::vector<Tensor> feats;
    feats.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
      feats.push_back(reshape(slice(g_interp.features, 0, i, 1), {fs[1], fs[2], fs[3]}));
    }
    const Tensor l_dr_t = distance_regularization(feats, k);
    l_dr_val = l_dr_t.value();
    total_g_t = add(total_g_t, scale(l_dr_t, cfg_.lambda2));
  }
  for (auto& p : d_params_) p.tensor.zero_grad();
  for (auto& p : g_params_) p.tensor.zero_grad();
  total_g_t.backward();
  adam_step(g_params_, adam_g_, {cfg_.lr_g, cfg_.adam_beta1, cfg_.adam_beta2});

  step_ += 1;
  const LossReport report =
      total_objectives(l_adv_g_t.value(), l_adv_d_val, l_inp_val, l_dr_val, l_g_val,
                       cfg_.lambda1, cfg_.lambda2, cfg_.lambda3);
  history_.push_back(report);
  return report;
}

MetricsRow Trainer::evaluate(std::size_t at_step) const {
  NoGradGuard ng;
  RngEngine eval_rng(seed_stream(cfg_.seed ^ 0x6576616cULL /* "eval" */, at_step));
  MetricsRow row;
  row.step = at_step;

  const std::size_t B = cfg_.batch_size;
  const std::vector<std::size_t> idx = draw_batch_indices(eval_rng, dataset_.images.size(), B);
  const Tensor real = make_batch(idx);
  const Tensor z = sample_latents(B, cfg_.latent_dim, eval_rng);

  const auto d_real = d_->forward(real);
  const auto fake = g_->forward(z);
  const auto d_fake = d_->forward(fake.images);
  auto [l_adv_g_t, l_adv_d_t] = adversarial_losses(d_real.probs, d_fake.probs);
  row.l_adv_g = l_adv_g_t.value();
  row.l_adv_d = l_adv_d_t.value();

  if (cfg_.iandr_on) {
    const Tensor z_a = reshape(sample_latents(1, cfg_.latent_dim, eval_rng), {cfg_.latent_dim});
    const Tensor z_b = reshape(sample_latents(1, cfg_.latent_dim, eval_rng), {cfg_.latent_dim});
    const std::vector<Tensor> z_interp = interpolation_set(z_a, z_b, cfg_.interp_size);
    std::vector<double> flat;
    for (const auto& zi : z_interp) flat.insert(flat.end(), zi.data().begin(), zi.data().end());
    const auto g_interp = g_->forward(Tensor::from_data({cfg_.interp_size, cfg_.latent_dim},
                                                        std::move(flat)));
    row.l_inp = interpolation_loss(d_->forward(g_interp.images).probs).value();
    const Shape& fs = g_interp.features.shape();
    std::vector<Tensor> feats;
    for (std::size_t i = 0; i < cfg_.interp_size; ++i) {
      feats.push_back(reshape(slice(g_interp.features, 0, i, 1), {fs[1], fs[2], fs[3]}));
    }
    row.l_dr = distance_regularization(feats, cfg_.interp_size).value();
  }
  if (cfg_.fags_on) {
    WeightVector omega = sample_dirichlet(B, cfg_.dirichlet_alpha, eval_rng);
    std::vector<Tensor> rows;
    for (std::size_t i = 0; i < B; ++i) rows.push_back(latent_row(z, i));
    const Tensor zbar = anchor_latent(rows, omega);
    const Tensor anchor_image = g_->forward(reshape(zbar, {1, cfg_.latent_dim})).images;
    const auto stacks = per_sample_stacks(d_real.taps);
    const PseudoSourceBatch pseudo = pseudo_source_features(stacks, omega);
    const auto d_anchor = d_->forward(anchor_image);
    const TargetFeatureBatch target =
        target_features(per_sample_stacks(d_anchor.taps).front(), zbar);
    row.l_g = geodesic_scc_loss(pseudo, target).value();
  }

  // sample-set metrics
  const std::size_t n_samples = cfg_.eval_samples;
  const Tensor zs = sample_latents(n_samples, cfg_.latent_dim, eval_rng);
  const auto sample_out = g_->forward(zs);
  std::vector<Tensor> images;
  const Shape& is = sample_out.images.shape();
  for (std::size_t i = 0; i < n_samples; ++i) {
    images.push_back(reshape(slice(sample_out.images, 0, i, 1), {is[2], is[3]}));
  }
  row.pairwise_diversity = pairwise_diversity(images);

  if (dataset_.images.size() >= 2) {
    std::vector<std::size_t> all(dataset_.images.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const auto d_all = d_->forward(make_batch(all));
    const auto d_gen = d_->forward(sample_out.images);
    auto rows_of = [](const Tensor& t) {
      std::vector<std::vector<double>> out;
      const std::size_t n = t.shape()[0], dim = t.shape()[1];
      const auto& data = t.data();
      for (std::size_t i = 0; i < n; ++i) {
        out.emplace_back(data.begin() + static_cast<std::ptrdiff_t>(i * dim),
                         data.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim));
      }
      return out;
    };
    row.ffd = frechet_feature_distance(rows_of(d_all.penultimate), rows_of(d_gen.penultimate));
  }

  double smooth_acc = 0.0;
  for (std::size_t p = 0; p < kEvalPaths; ++p) {
    const Tensor za = reshape(sample_latents(1, cfg_.latent_dim, eval_rng), {cfg_.latent_dim});
    const Tensor zb = reshape(sample_latents(1, cfg_.latent_dim, eval_rng), {cfg_.latent_dim});
    smooth_acc += interpolation_smoothness(*g_, za, zb, kEvalK);
  }
  row.smoothness = smooth_acc / static_cast<double>(kEvalPaths);
  return row;
}

void Trainer::run() {
  fs::create_directories(cfg_.out_dir);
  const fs::path losses_path = fs::path(cfg_.out_dir) / "losses.csv";
  const fs::path metrics_path = fs::path(cfg_.out_dir) / "metrics.csv";
  const bool resuming = !cfg_.resume.empty();

  if (cfg_.steps == 0) {
    save_checkpoint(fs::path(cfg_.out_dir) / ckpt_dir_name(step_));
    return;
  }

  std::ofstream losses(losses_path, resuming ? std::ios::app : std::ios::trunc);
  std::ofstream metrics(metrics_path, resuming ? std::ios::app : std::ios::trunc);
  if (!losses || !metrics) throw std::runtime_error("cannot open CSV outputs in " + cfg_.out_dir);
  if (!resuming) {
    losses << losses_csv_header() << "\n";
    metrics << metrics_csv_header() << "\n";
  }

  while (step_ < cfg_.steps) {
    const LossReport r = train_step();
    losses << losses_csv_row(step_, r) << "\n";
    losses.flush();
    if (step_ % cfg_.eval_every == 0 || step_ == cfg_.steps) {
      metrics << metrics_csv_row(evaluate(step_)) << "\n";
      metrics.flush();
    }
    if (step_ % cfg_.checkpoint_every == 0 || step_ == cfg_.steps) {
      save_checkpoint(fs::path(cfg_.out_dir) / ckpt_dir_name(step_));
    }
  }
}

// ---- checkpointing ----

void Trainer::save_checkpoint(const fs::path& dir) const {
  const fs::path tmp = dir.string() + ".tmp";
  fs::remove_all(tmp);
  fs::create_directories(tmp);

  std::vector<std::pair<std::string, std::string>> manifest;
  manifest.emplace_back("format_version", std::to_string(kManifestVersion));
  manifest.emplace_back("step", std::to_string(step_));
  manifest.emplace_back("seed", std::to_string(cfg_.seed));
  manifest.emplace_back("image_size", std::to_string(cfg_.image_size));
  manifest.emplace_back("latent_dim", std::to_string(cfg_.latent_dim));
  manifest.emplace_back("adam_g_t", std::to_string(adam_g_.t));
  manifest.emplace_back("adam_d_t", std::to_string(adam_d_.t));
  manifest.emplace_back("rng_state", rng_state_to_string(rng_));
  write_kv_file(tmp / "manifest.txt", manifest);

  auto dump_params = [&](const std::vector<NamedParam>& params, const AdamState& adam) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto& p = params[i];
      write_tensor_file(tmp / (p.name + ".gsl"), p.tensor);
      if (adam.t > 0) {
        const Shape& s = p.tensor.shape();
        write_tensor_file(tmp / ("adam." + p.name + ".m.gsl"), Tensor::from_data(s, adam.m[i]));
        write_tensor_file(tmp / ("adam." + p.name + ".v.gsl"), Tensor::from_data(s, adam.v[i]));
      }
    }
  };
  dump_params(g_params_, adam_g_);
  dump_params(d_params_, adam_d_);

  fs::remove_all(dir);
  fs::rename(tmp, dir);
}

LoadedCheckpoint load_checkpoint_dir(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.txt";
  if (!fs::exists(manifest_path)) {
    throw std::runtime_error("corrupt checkpoint: missing manifest in " + dir.string());
  }
  const auto manifest = read_kv_file(manifest_path);
  auto want = [&](const std::string& key) -> const std::string& {
    auto it = manifest.find(key);
    if (it == manifest.end()) {
      throw std::runtime_error("corrupt checkpoint: manifest missing key '" + key + "'");
    }
    return it->second;
  };
  const int version = std::stoi(want("format_version"));
  if (version != kManifestVersion) {
    throw std::runtime_error("checkpoint format version " + std::to_string(version) +
                             " unsupported (expected " + std::to_string(kManifestVersion) + ")");
  }

  LoadedCheckpoint ck;
  ck.step = std::stoul(want("step"));
  ck.seed = std::stoull(want("seed"));
  ck.image_size = std::stoul(want("image_size"));
  ck.latent_dim = std::stoul(want("latent_dim"));
  rng_state_from_string(ck.rng, want("rng_state"));

  // Architecture is implied by the manifest dims; parameter values are then
  // overwritten in place from the per-parameter tensor files.
  RngEngine scratch_rng(0);
  ck.g = std::make_unique<Generator>(ck.latent_dim, ck.image_size, scratch_rng);
  ck.d = std::make_unique<Discriminator>(ck.image_size, scratch_rng);
  ck.adam_g.t = std::stoul(want("adam_g_t"));
  ck.adam_d.t = std::stoul(want("adam_d_t"));

  auto load_params = [&](std::vector<NamedParam> params, AdamState& adam) {
    adam.m.resize(params.size());
    adam.v.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& p = params[i];
      const fs::path file = dir / (p.name + ".gsl");
      if (!fs::exists(file)) {
        throw std::runtime_error("corrupt checkpoint: missing tensor " + file.string());
      }
      Tensor t;
      try {
        t = read_tensor_file(file);
      } catch (const std::runtime_error& e) {
        throw std::runtime_error(std::string("corrupt checkpoint: ") + e.what());
      }
      if (t.shape() != p.tensor.shape()) {
        throw std::runtime_error("corrupt checkpoint: tensor " + p.name + " has shape " +
                                 shape_str(t.shape()) + ", expected " +
                                 shape_str(p.tensor.shape()));
      }
      p.tensor.data() = t.data();
      if (adam.t > 0) {
        adam.m[i] = read_tensor_file(dir / ("adam." + p.name + ".m.gsl")).data();
        adam.v[i] = read_tensor_file(dir / ("adam." + p.name + ".v.gsl")).data();
      } else {
        adam.m[i].assign(p.tensor.size(), 0.0);
        adam.v[i].assign(p.tensor.size(), 0.0);
      }
    }
  };
  load_params(ck.g->parameters(), ck.adam_g);
  load_params(ck.d->parameters(), ck.adam_d);
  return ck;
}

void Trainer::load_checkpoint(const fs::path& dir) {
  LoadedCheckpoint ck = load_checkpoint_dir(dir);
  if (ck.image_size != cfg_.image_size || ck.latent_dim != cfg_.latent_dim) {
    throw std::runtime_error("checkpoint dims (image " + std::to_string(ck.image_size) +
                             ", latent " + std::to_string(ck.latent_dim) +
                             ") do not match config");
  }
  g_ = std::move(ck.g);
  d_ = std::move(ck.d);
  g_params_ = g_->parameters();
  d_params_ = d_->parameters();
  adam_g_ = std::move(ck.adam_g);
  adam_d_ = std::move(ck.adam_d);
  rng_ = ck.rng;
  step_ = ck.step;

  tap_ids_ = cfg_.tap_layers;
  const auto ids = d_->conv_layer_ids();
  if (tap_ids_.empty()) {
    const std::size_t n = ids.size();
    tap_ids_.assign(ids.begin() + (n > 2 ? n - 2 : 0), ids.end());
  }
}

}  // namespace gsgan
