#pragma once
// File formats: the flat binary tensor container (magic "GSL1", u32 rank,
// rank x u64 extents, little-endian f64 payload), grayscale PGM/PNG image
// ingestion, and plain key=value text files.

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gsgan/tensor.hpp"

namespace gsgan {

void write_tensor_file(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor_file(const std::filesystem::path& path);

struct DatasetImage {
  std::string id;              // filename, used for deterministic ordering
  std::vector<double> pixels;  // row-major, scaled to [-1, 1]
};

struct Dataset {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<DatasetImage> images;
  std::filesystem::path source_dir;

  // {n, 1, H, W} batch of the given image indices.
  Tensor batch(const std::vector<std::size_t>& indices) const;
  Tensor image_tensor(std::size_t index) const;  // {1, H, W}
};

// Reads every *.pgm (P5), *.png (8-bit grayscale) and *.gsl file in `dir`,
// sorted by filename. Pixels map as v/127.5 - 1; .gsl tensors must already
// hold values in [-1, 1] with shape {H,W} or {1,H,W}.
Dataset load_dataset(const std::filesystem::path& dir);

// Grayscale image writers; values in [-1, 1] map back to [0, 255].
void write_pgm(const std::filesystem::path& path, std::size_t width, std::size_t height,
               const std::vector<double>& pixels);

// Decoded grayscale image in [0, 255] bytes.
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<unsigned char> pixels;
};
GrayImage read_pgm(const std::filesystem::path& path);
GrayImage read_png_gray8(const std::filesystem::path& path);

// key=value text with '#' comments; preserves insertion order on write.
std::map<std::string, std::string> read_kv_file(const std::filesystem::path& path);
void write_kv_file(const std::filesystem::path& path,
                   const std::vector<std::pair<std::string, std::string>>& entries);

// printf("%.17g") — round-trip-exact doubles for CSV/manifest output.
std::string fmt_g17(double v);

}  // namespace gsgan
