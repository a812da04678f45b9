#pragma once
// Alternating-update training loop: one discriminator step minimizing
// l_adv_d + lambda1*l_inp + lambda3*l_g, then one generator step minimizing
// l_adv_g - lambda1*l_inp + lambda2*l_dr. A single Dirichlet draw per step
// feeds both the anchor latent and the geodesic surface. Deterministic for a
// fixed seed and exactly resumable from checkpoints.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "gsgan/augment.hpp"
#include "gsgan/dataio.hpp"
#include "gsgan/losses.hpp"
#include "gsgan/metrics.hpp"
#include "gsgan/nets.hpp"
#include "gsgan/random.hpp"

namespace gsgan {

struct TrainConfig {
  double lambda1 = 0.8;
  double lambda2 = 1.25;
  double lambda3 = 0.8;
  std::size_t batch_size = 4;
  std::size_t interp_size = 4;
  std::size_t steps = 0;
  double lr_g = 2e-4;
  double lr_d = 2e-4;
  double adam_beta1 = 0.5;
  double adam_beta2 = 0.999;
  double dirichlet_alpha = 1.0;
  std::vector<int> tap_layers;  // empty -> last two discriminator convs
  std::uint64_t seed = 1;
  std::string dataset_dir;
  std::string out_dir = "run";
  std::size_t checkpoint_every = 500;
  std::size_t eval_every = 500;
  bool fags_on = true;
  bool iandr_on = true;
  std::size_t image_size = 16;
  std::size_t latent_dim = 64;
  std::size_t eval_samples = 16;
  std::string resume;  // checkpoint directory, optional

  static TrainConfig from_file(const std::filesystem::path& path);
  void apply_override(const std::string& key, const std::string& value);
  void validate() const;
};

struct AdamParams {
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::size_t t = 0;
};

void adam_step(std::vector<NamedParam>& params, AdamState& state, const AdamParams& hp);

// Uniform-with-replacement batch indices; exposed for distribution tests.
std::vector<std::size_t> draw_batch_indices(RngEngine& rng, std::size_t dataset_size,
                                            std::size_t batch_size);

class Trainer {
 public:
  explicit Trainer(TrainConfig cfg);

  LossReport train_step();
  // Full loop with loss/metrics CSVs and checkpoints under cfg.out_dir.
  void run();
  MetricsRow evaluate(std::size_t at_step) const;

  void save_checkpoint(const std::filesystem::path& dir) const;
  void load_checkpoint(const std::filesystem::path& dir);

  std::size_t step() const { return step_; }
  const TrainConfig& config() const { return cfg_; }
  const Dataset& dataset() const { return dataset_; }
  const Generator& generator() const { return *g_; }
  const Discriminator& discriminator() const { return *d_; }
  Generator& generator() { return *g_; }
  Discriminator& discriminator() { return *d_; }
  const std::vector<LossReport>& history() const { return history_; }
  const std::vector<int>& tap_ids() const { return tap_ids_; }

 private:
  void init_networks();
  Tensor make_batch(const std::vector<std::size_t>& indices) const;
  std::vector<FeatureStack> per_sample_stacks(
      const std::vector<std::pair<int, Tensor>>& taps) const;

  TrainConfig cfg_;
  Dataset dataset_;
  std::vector<int> tap_ids_;
  std::unique_ptr<Generator> g_;
  std::unique_ptr<Discriminator> d_;
  std::vector<NamedParam> g_params_;
  std::vector<NamedParam> d_params_;
  AdamState adam_g_;
  AdamState adam_d_;
  RngEngine rng_;
  std::size_t step_ = 0;
  std::vector<LossReport> history_;
};

// Networks and optimizer/rng state reconstructed from a checkpoint directory.
struct LoadedCheckpoint {
  std::size_t step = 0;
  std::uint64_t seed = 0;
  std::size_t image_size = 0;
  std::size_t latent_dim = 0;
  std::unique_ptr<Generator> g;
  std::unique_ptr<Discriminator> d;
  AdamState adam_g;
  AdamState adam_d;
  RngEngine rng;
};
LoadedCheckpoint load_checkpoint_dir(const std::filesystem::path& dir);

}  // namespace gsgan
