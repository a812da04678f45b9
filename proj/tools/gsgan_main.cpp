// gsgan — train and probe the geodesic-surface few-shot GAN.
//
// Subcommands: train, augment, interpolate, gradcheck, metrics, ablate.
// Every command is deterministic for a fixed --seed.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "gsgan/augment.hpp"
#include "gsgan/dataio.hpp"
#include "gsgan/gradsuite.hpp"
#include "gsgan/losses.hpp"
#include "gsgan/metrics.hpp"
#include "gsgan/nets.hpp"
#include "gsgan/train.hpp"

namespace fs = std::filesystem;
using namespace gsgan;

namespace {

TrainConfig config_with_overrides(const std::string& config_path,
                                  const std::vector<std::string>& overrides) {
  TrainConfig cfg = TrainConfig::from_file(config_path);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("--override expects key=value, got '" + kv + "'");
    }
    cfg.apply_override(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

int cmd_train(const std::string& config_path, const std::vector<std::string>& overrides) {
  Trainer trainer(config_with_overrides(config_path, overrides));
  trainer.run();
  std::printf("trained to step %zu, outputs in %s\n", trainer.step(),
              trainer.config().out_dir.c_str());
  return 0;
}

int cmd_augment(const std::string& features_dir, std::size_t n, double alpha,
                std::uint64_t seed, const std::string& out_dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(features_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".gsl") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  if (files.empty()) throw std::runtime_error("no .gsl feature tensors in " + features_dir);

  std::vector<FeatureStack> stacks;
  for (const auto& file : files) {
    Tensor t = read_tensor_file(file);
    if (t.rank() != 3) t = reshape(t, {1, 1, t.size()});
    stacks.push_back(FeatureStack{{FeatureLayer{1, t}}});
  }

  fs::create_directories(out_dir);
  RngEngine rng(seed_stream(seed, 0));
  std::ofstream weights(fs::path(out_dir) / "weights.csv", std::ios::trunc);
  weights << "sample";
  for (std::size_t i = 0; i < stacks.size(); ++i) weights << ",w" << i;
  weights << "\n";
  for (std::size_t j = 0; j < n; ++j) {
    const WeightVector omega = sample_dirichlet(stacks.size(), alpha, rng);
    const PseudoSourceBatch pseudo = pseudo_source_features(stacks, omega);
    char name[32];
    std::snprintf(name, sizeof(name), "pseudo_%04zu.gsl", j);
    write_tensor_file(fs::path(out_dir) / name, pseudo.layers.front().feature.detach());
    weights << j;
    for (double w : omega.weights) weights << "," << fmt_g17(w);
    weights << "\n";
  }
  std::printf("wrote %zu pseudo-source tensors to %s\n", n, out_dir.c_str());
  return 0;
}

int cmd_interpolate(const std::string& ckpt, std::size_t k, std::uint64_t seed,
                    const std::string& out_dir) {
  LoadedCheckpoint loaded = load_checkpoint_dir(ckpt);
  RngEngine rng(seed_stream(seed, 0));
  const Tensor z_a = reshape(sample_latents(1, loaded.latent_dim, rng), {loaded.latent_dim});
  const Tensor z_b = reshape(sample_latents(1, loaded.latent_dim, rng), {loaded.latent_dim});

  const auto zs = interpolation_set(z_a, z_b, k);
  std::vector<double> flat;
  for (const auto& z : zs) flat.insert(flat.end(), z.data().begin(), z.data().end());
  NoGradGuard ng;
  const Tensor images = loaded.g->forward(Tensor::from_data({k, loaded.latent_dim},
                                                            std::move(flat))).images;
  fs::create_directories(out_dir);
  const std::size_t px = loaded.image_size * loaded.image_size;
  const auto& data = images.data();
  for (std::size_t i = 0; i < k; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "interp_%03zu.pgm", i);
    write_pgm(fs::path(out_dir) / name, loaded.image_size, loaded.image_size,
              {data.begin() + static_cast<std::ptrdiff_t>(i * px),
               data.begin() + static_cast<std::ptrdiff_t>((i + 1) * px)});
  }
  const double smooth = interpolation_smoothness(*loaded.g, z_a, z_b, k);
  std::ofstream sm(fs::path(out_dir) / "smoothness.txt", std::ios::trunc);
  sm << fmt_g17(smooth) << "\n";
  std::printf("wrote %zu images to %s, smoothness %.6f\n", k, out_dir.c_str(), smooth);
  return 0;
}

int cmd_gradcheck(const std::string& target_name, std::uint64_t seed, double tol) {
  const auto results = run_gradient_suite(parse_grad_target(target_name), seed);
  bool ok = true;
  for (const auto& suite : results) {
    const double mx = max_rel_error(suite.reports);
    const double frac = pass_fraction(suite.reports, tol);
    const bool suite_ok = mx <= tol;
    ok = ok && suite_ok;
    std::printf("%-10s coords=%-4zu max_rel_err=%.3e pass=%5.1f%% %s\n", suite.name.c_str(),
                suite.reports.size(), mx, 100.0 * frac, suite_ok ? "OK" : "FAIL");
    if (!suite_ok) {
      for (const auto& r : suite.reports) {
        if (r.rel_error > tol) {
          std::printf("  %s analytic=%.6e numeric=%.6e rel=%.3e\n", r.param.c_str(), r.analytic,
                      r.numeric, r.rel_error);
        }
      }
    }
  }
  return ok ? 0 : 1;
}

int cmd_metrics(const std::string& ckpt, const std::string& dataset_dir, std::size_t samples,
                const std::string& out_file) {
  LoadedCheckpoint loaded = load_checkpoint_dir(ckpt);
  TrainConfig cfg;
  cfg.dataset_dir = dataset_dir;
  cfg.image_size = loaded.image_size;
  cfg.latent_dim = loaded.latent_dim;
  cfg.seed = loaded.seed;
  cfg.eval_samples = samples;
  cfg.resume = ckpt;
  Trainer trainer(cfg);
  const MetricsRow row = trainer.evaluate(trainer.step());

  std::ofstream out(out_file, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + out_file);
  out << "step,l_adv_g,l_adv_d,l_inp,l_dr,l_g,diversity,ffd,smoothness\n";
  out << row.step << "," << fmt_g17(row.l_adv_g) << "," << fmt_g17(row.l_adv_d) << ","
      << fmt_g17(row.l_inp) << "," << fmt_g17(row.l_dr) << "," << fmt_g17(row.l_g) << ","
      << fmt_g17(row.pairwise_diversity) << "," << fmt_g17(row.ffd) << ","
      << fmt_g17(row.smoothness) << "\n";
  std::printf("metrics at step %zu: diversity=%.4f ffd=%.4f smoothness=%.4f -> %s\n", row.step,
              row.pairwise_diversity, row.ffd, row.smoothness, out_file.c_str());
  return 0;
}

int cmd_ablate(const std::string& config_path, const std::vector<std::string>& overrides,
               std::size_t n_seeds, const std::string& out_file) {
  const TrainConfig base = config_with_overrides(config_path, overrides);
  struct Variant {
    const char* name;
    bool fags, iandr;
  };
  const Variant variants[] = {
      {"plain", false, false}, {"fags", true, false}, {"iandr", false, true},
      {"full", true, true},
  };
  std::ofstream out(out_file, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + out_file);
  out << "variant,fags_on,iandr_on,seed,step,l_adv_g,l_adv_d,l_inp,l_dr,l_g,"
         "diversity,ffd,smoothness\n";
  for (const auto& variant : variants) {
    for (std::size_t s = 0; s < n_seeds; ++s) {
      TrainConfig cfg = base;
      cfg.fags_on = variant.fags;
      cfg.iandr_on = variant.iandr;
      cfg.seed = base.seed + s;
      cfg.out_dir = (fs::path(base.out_dir) /
                     (std::string(variant.name) + "-seed" + std::to_string(cfg.seed))).string();
      Trainer trainer(cfg);
      trainer.run();
      const MetricsRow row = trainer.evaluate(trainer.step());
      out << variant.name << "," << (variant.fags ? 1 : 0) << "," << (variant.iandr ? 1 : 0)
          << "," << cfg.seed << "," << row.step << "," << fmt_g17(row.l_adv_g) << ","
          << fmt_g17(row.l_adv_d) << "," << fmt_g17(row.l_inp) << "," << fmt_g17(row.l_dr) << ","
          << fmt_g17(row.l_g) << "," << fmt_g17(row.pairwise_diversity) << ","
          << fmt_g17(row.ffd) << "," << fmt_g17(row.smoothness) << "\n";
      out.flush();
      std::printf("%s seed=%llu done: diversity=%.4f smoothness=%.4f\n", variant.name,
                  static_cast<unsigned long long>(cfg.seed), row.pairwise_diversity,
                  row.smoothness);
    }
  }
  std::printf("ablation grid written to %s\n", out_file.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geodesic-surface few-shot GAN toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  auto* train = app.add_subcommand("train", "run the training loop from a config file");
  train->add_option("--config", config_path, "key=value config file")->required();
  train->add_option("--override", overrides, "config overrides, key=value");

  std::string features_dir, aug_out;
  std::size_t aug_n = 8;
  double aug_alpha = 1.0;
  std::uint64_t aug_seed = 1;
  auto* augment = app.add_subcommand("augment", "emit pseudo-source tensors from .gsl features");
  augment->add_option("--features", features_dir, "directory of .gsl feature tensors")->required();
  augment->add_option("--n", aug_n, "number of pseudo-source samples to generate");
  augment->add_option("--alpha", aug_alpha, "Dirichlet concentration");
  augment->add_option("--seed", aug_seed, "rng seed");
  augment->add_option("--out", aug_out, "output directory")->required();

  std::string interp_ckpt, interp_out;
  std::size_t interp_k = 8;
  std::uint64_t interp_seed = 1;
  auto* interpolate = app.add_subcommand("interpolate", "emit PGM images along a latent path");
  interpolate->add_option("--checkpoint", interp_ckpt, "checkpoint directory")->required();
  interpolate->add_option("--k", interp_k, "path length")->check(CLI::Range(3, 1 << 20));
  interpolate->add_option("--seed", interp_seed, "rng seed");
  interpolate->add_option("--out", interp_out, "output directory")->required();

  std::string grad_target = "all";
  std::uint64_t grad_seed = 11;
  double grad_tol = 1e-4;
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient suites");
  gradcheck->add_option("--target", grad_target, "lg|ldr|linp|adv|total|all");
  gradcheck->add_option("--seed", grad_seed, "fixture seed");
  gradcheck->add_option("--tol", grad_tol, "relative error tolerance");

  std::string met_ckpt, met_dataset, met_out = "metrics.csv";
  std::size_t met_samples = 16;
  auto* metrics = app.add_subcommand("metrics", "write a metrics CSV row for a checkpoint");
  metrics->add_option("--checkpoint", met_ckpt, "checkpoint directory")->required();
  metrics->add_option("--dataset", met_dataset, "dataset directory")->required();
  metrics->add_option("--samples", met_samples, "generated sample count")
      ->check(CLI::Range(2, 1 << 20));
  metrics->add_option("--out", met_out, "output CSV file");

  std::string abl_config, abl_out = "ablation.csv";
  std::vector<std::string> abl_overrides;
  std::size_t abl_seeds = 1;
  auto* ablate = app.add_subcommand("ablate", "run the 2x2 feature-toggle grid");
  ablate->add_option("--config", abl_config, "base config file")->required();
  ablate->add_option("--override", abl_overrides, "config overrides, key=value");
  ablate->add_option("--seeds", abl_seeds, "seeds per variant")->check(CLI::Range(1, 64));
  ablate->add_option("--out", abl_out, "comparison CSV file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help() << "\n";
    return 2;
  }

  try {
    if (*train) return cmd_train(config_path, overrides);
    if (*augment) return cmd_augment(features_dir, aug_n, aug_alpha, aug_seed, aug_out);
    if (*interpolate) return cmd_interpolate(interp_ckpt, interp_k, interp_seed, interp_out);
    if (*gradcheck) return cmd_gradcheck(grad_target, grad_seed, grad_tol);
    if (*metrics) return cmd_metrics(met_ckpt, met_dataset, met_samples, met_out);
    if (*ablate) return cmd_ablate(abl_config, abl_overrides, abl_seeds, abl_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
