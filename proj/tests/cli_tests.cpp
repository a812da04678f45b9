// End-to-end checks of the command-line tool. The binary path comes from the
// GSGAN_BIN compile definition.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gsgan/dataio.hpp"
#include "gsgan/random.hpp"
#include "testutil.hpp"

using namespace gsgan;
using testutil::TempDir;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(GSGAN_BIN) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::vector<char> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  return std::vector<char>((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
}

void write_config(const std::filesystem::path& file, const std::filesystem::path& dataset,
                  const std::filesystem::path& out, std::size_t steps) {
  std::ofstream cfg(file);
  cfg << "dataset=" << dataset.string() << "\nout_dir=" << out.string() << "\nsteps=" << steps
      << "\nlatent_dim=16\nseed=5\ncheckpoint_every=4\neval_every=4\neval_samples=4\n";
}

}  // namespace

TEST_CASE("unknown subcommands and flags exit with 2") {
  CHECK(run_cli("frobnicate") == 2);
  CHECK(run_cli("gradcheck --no-such-flag") == 2);
  CHECK(run_cli("") == 2);
}

TEST_CASE("help exits 0") {
  CHECK(run_cli("--help") == 0);
}

TEST_CASE("train with steps=0 writes a checkpoint and exits 0") {
  TempDir data("clidata0"), out("cliout0");
  testutil::make_blob_dataset(data.path, 4, 16, 23);
  write_config(out.path / "run.cfg", data.path, out.path / "run", 0);
  CHECK(run_cli("train --config " + (out.path / "run.cfg").string()) == 0);
  CHECK(std::filesystem::exists(out.path / "run" / "ckpt-000000" / "manifest.txt"));
}

TEST_CASE("train fails before any step on an unreadable dataset") {
  TempDir out("clibad");
  write_config(out.path / "run.cfg", out.path / "missing", out.path / "run", 2);
  CHECK(run_cli("train --config " + (out.path / "run.cfg").string()) == 1);
  CHECK_FALSE(std::filesystem::exists(out.path / "run" / "losses.csv"));
}

TEST_CASE("train/interpolate/metrics pipeline with deterministic outputs") {
  TempDir data("clidata"), out("cliout");
  testutil::make_blob_dataset(data.path, 6, 16, 24);
  write_config(out.path / "run.cfg", data.path, out.path / "run", 4);
  REQUIRE(run_cli("train --config " + (out.path / "run.cfg").string() +
                  " --override steps=4") == 0);
  const std::string ckpt = (out.path / "run" / "ckpt-000004").string();
  REQUIRE(std::filesystem::exists(ckpt));

  // interpolate twice with the same seed: byte-identical images
  REQUIRE(run_cli("interpolate --checkpoint " + ckpt + " --k 5 --seed 9 --out " +
                  (out.path / "interp_a").string()) == 0);
  REQUIRE(run_cli("interpolate --checkpoint " + ckpt + " --k 5 --seed 9 --out " +
                  (out.path / "interp_b").string()) == 0);
  for (int i = 0; i < 5; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "interp_%03d.pgm", i);
    CHECK(slurp(out.path / "interp_a" / name) == slurp(out.path / "interp_b" / name));
  }
  CHECK(std::filesystem::exists(out.path / "interp_a" / "smoothness.txt"));

  // metrics command writes one CSV row
  REQUIRE(run_cli("metrics --checkpoint " + ckpt + " --dataset " + data.path.string() +
                  " --samples 4 --out " + (out.path / "m.csv").string()) == 0);
  std::ifstream m(out.path / "m.csv");
  std::string header, row;
  REQUIRE(std::getline(m, header));
  REQUIRE(std::getline(m, row));
  CHECK(header == "step,l_adv_g,l_adv_d,l_inp,l_dr,l_g,diversity,ffd,smoothness");
  CHECK(row.rfind("4,", 0) == 0);
}

TEST_CASE("augment emits the requested number of pseudo-source tensors") {
  TempDir feats("clifeat"), out("cliaug");
  RngEngine rng(25);
  for (int i = 0; i < 3; ++i) {
    std::vector<double> d(2 * 4 * 4);
    for (auto& v : d) v = normal_sample(rng);
    write_tensor_file(feats.path / ("f" + std::to_string(i) + ".gsl"),
                      Tensor::from_data({2, 4, 4}, d));
  }
  REQUIRE(run_cli("augment --features " + feats.path.string() +
                  " --n 5 --alpha 1.0 --seed 3 --out " + out.path.string()) == 0);
  for (int j = 0; j < 5; ++j) {
    char name[32];
    std::snprintf(name, sizeof(name), "pseudo_%04d.gsl", j);
    const Tensor t = read_tensor_file(out.path / name);
    CHECK(t.shape() == Shape{2, 4, 4});
    // outputs are unit-norm pre-shapes laid back out as feature maps
    double sq = 0.0;
    for (double v : t.data()) sq += v * v;
    CHECK(std::sqrt(sq) == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK(std::filesystem::exists(out.path / "weights.csv"));
}

TEST_CASE("gradcheck on a fast target exits 0") {
  CHECK(run_cli("gradcheck --target ldr") == 0);
}

TEST_CASE("same-seed runs produce byte-identical loss CSVs") {
  TempDir data("clidet"), out("clidetout");
  testutil::make_blob_dataset(data.path, 5, 16, 26);
  write_config(out.path / "run.cfg", data.path, out.path / "run", 4);
  for (const char* dir : {"run_a", "run_b"}) {
    REQUIRE(run_cli("train --config " + (out.path / "run.cfg").string() + " --override out_dir=" +
                    (out.path / dir).string()) == 0);
  }
  CHECK(slurp(out.path / "run_a" / "losses.csv") == slurp(out.path / "run_b" / "losses.csv"));
  CHECK(slurp(out.path / "run_a" / "metrics.csv") == slurp(out.path / "run_b" / "metrics.csv"));
}
