#include <doctest.h>

#include <fstream>

#include "gsgan/dataio.hpp"
#include "gsgan/random.hpp"
#include "testutil.hpp"

using namespace gsgan;
using testutil::TempDir;

TEST_CASE("tensor file round trip is exact") {
  TempDir tmp("tensorio");
  RngEngine rng(81);
  std::vector<double> data(24);
  for (auto& v : data) v = normal_sample(rng);
  const Tensor t = Tensor::from_data({2, 3, 4}, data);
  const auto file = tmp.path / "t.gsl";
  write_tensor_file(file, t);
  const Tensor back = read_tensor_file(file);
  CHECK(back.shape() == t.shape());
  CHECK(back.data() == t.data());  // bit-exact
}

TEST_CASE("tensor file header layout is the documented one") {
  TempDir tmp("tensorhdr");
  const auto file = tmp.path / "t.gsl";
  write_tensor_file(file, Tensor::from_data({2, 1}, {1.0, -2.0}));
  std::ifstream in(file, std::ios::binary);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  REQUIRE(bytes.size() == 4 + 4 + 2 * 8 + 2 * 8);
  CHECK(bytes[0] == 'G');
  CHECK(bytes[1] == 'S');
  CHECK(bytes[2] == 'L');
  CHECK(bytes[3] == '1');
  CHECK(bytes[4] == 2);  // rank, little-endian u32
  CHECK(bytes[8] == 2);  // first extent, little-endian u64
  CHECK(bytes[16] == 1);
}

TEST_CASE("truncated and corrupt tensor files are rejected") {
  TempDir tmp("tensorbad");
  const auto file = tmp.path / "t.gsl";
  write_tensor_file(file, Tensor::from_data({4}, {1, 2, 3, 4}));
  // truncate the payload
  std::filesystem::resize_file(file, 20);
  CHECK_THROWS_WITH_AS(read_tensor_file(file), doctest::Contains("corrupt"), std::runtime_error);

  const auto bad = tmp.path / "bad.gsl";
  std::ofstream(bad, std::ios::binary) << "NOPE1234";
  CHECK_THROWS_WITH_AS(read_tensor_file(bad), doctest::Contains("magic"), std::runtime_error);
}

TEST_CASE("pgm round trip and pixel mapping endpoints") {
  TempDir tmp("pgm");
  const auto file = tmp.path / "img.pgm";
  write_pgm(file, 2, 2, {-1.0, 1.0, 0.0, -1.0});
  const GrayImage img = read_pgm(file);
  REQUIRE(img.width == 2);
  REQUIRE(img.height == 2);
  CHECK(img.pixels[0] == 0);
  CHECK(img.pixels[1] == 255);
  CHECK(img.pixels[2] == 128);  // round(127.5)

  const Dataset ds = load_dataset(tmp.path);
  REQUIRE(ds.images.size() == 1);
  CHECK(ds.images[0].pixels[0] == doctest::Approx(-1.0));
  CHECK(ds.images[0].pixels[1] == doctest::Approx(1.0));
}

TEST_CASE("png loader handles the encoder's output") {
  TempDir tmp("png");
  std::vector<unsigned char> pixels(16 * 16);
  for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = static_cast<unsigned char>(i);
  testutil::write_png_gray8(tmp.path / "img.png", 16, 16, pixels);
  const GrayImage img = read_png_gray8(tmp.path / "img.png");
  REQUIRE(img.width == 16);
  REQUIRE(img.height == 16);
  CHECK(img.pixels == pixels);
}

TEST_CASE("dataset loading rules") {
  SUBCASE("empty directory errors") {
    TempDir tmp("empty");
    CHECK_THROWS_WITH_AS(load_dataset(tmp.path), doctest::Contains("no images found"),
                         std::runtime_error);
  }
  SUBCASE("missing directory errors") {
    CHECK_THROWS_AS(load_dataset("/nonexistent/gsgan/dir"), std::runtime_error);
  }
  SUBCASE("mixed dimensions error") {
    TempDir tmp("mixed");
    write_pgm(tmp.path / "a.pgm", 4, 4, std::vector<double>(16, 0.0));
    write_pgm(tmp.path / "b.pgm", 8, 8, std::vector<double>(64, 0.0));
    CHECK_THROWS_WITH_AS(load_dataset(tmp.path), doctest::Contains("mixed dimensions"),
                         std::runtime_error);
  }
  SUBCASE("filename-sorted order and mixed formats") {
    TempDir tmp("sorted");
    write_pgm(tmp.path / "b.pgm", 4, 4, std::vector<double>(16, 0.5));
    testutil::write_png_gray8(tmp.path / "a.png", 4, 4, std::vector<unsigned char>(16, 10));
    write_tensor_file(tmp.path / "c.gsl",
                      Tensor::from_data({4, 4}, std::vector<double>(16, 0.25)));
    const Dataset ds = load_dataset(tmp.path);
    REQUIRE(ds.images.size() == 3);
    CHECK(ds.images[0].id == "a.png");
    CHECK(ds.images[1].id == "b.pgm");
    CHECK(ds.images[2].id == "c.gsl");
    CHECK(ds.images[2].pixels[0] == 0.25);
  }
  SUBCASE("gsl image outside [-1,1] errors") {
    TempDir tmp("range");
    write_tensor_file(tmp.path / "c.gsl",
                      Tensor::from_data({2, 2}, {0.0, 0.0, 0.0, 1.5}));
    CHECK_THROWS_WITH_AS(load_dataset(tmp.path), doctest::Contains("[-1,1]"),
                         std::runtime_error);
  }
  SUBCASE("batch assembly shape") {
    TempDir tmp("batch");
    testutil::make_blob_dataset(tmp.path, 3, 16, 5);
    const Dataset ds = load_dataset(tmp.path);
    CHECK(ds.batch({0, 2, 1, 1}).shape() == Shape{4, 1, 16, 16});
  }
}

TEST_CASE("kv files parse comments, blanks and values with spaces") {
  TempDir tmp("kv");
  const auto file = tmp.path / "cfg.txt";
  {
    std::ofstream out(file);
    out << "# comment\n\n key = some value with spaces \nsteps=25\n";
  }
  const auto kv = read_kv_file(file);
  CHECK(kv.at("key") == "some value with spaces");
  CHECK(kv.at("steps") == "25");

  write_kv_file(file, {{"a", "1"}, {"b", "x y"}});
  const auto kv2 = read_kv_file(file);
  CHECK(kv2.at("a") == "1");
  CHECK(kv2.at("b") == "x y");
}

TEST_CASE("fmt_g17 round-trips doubles") {
  RngEngine rng(82);
  for (int i = 0; i < 50; ++i) {
    const double v = normal_sample(rng) * std::pow(10.0, static_cast<int>(uniform_index(rng, 9)) - 4);
    CHECK(std::stod(fmt_g17(v)) == v);
  }
}
