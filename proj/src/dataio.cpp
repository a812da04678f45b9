#include "gsgan/dataio.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace gsgan {

static_assert(std::endian::native == std::endian::little,
              "tensor file payloads are little-endian");

namespace fs = std::filesystem;

namespace {

std::vector<unsigned char> read_file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) throw std::runtime_error("failed reading file: " + path.string());
  return bytes;
}

std::uint32_t be32(const unsigned char* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) | (std::uint32_t(p[2]) << 8) |
         std::uint32_t(p[3]);
}

}  // namespace

// ---- GSL1 tensor container ----

void write_tensor_file(const fs::path& path, const Tensor& t) {
  if (!t.defined()) throw std::invalid_argument("write_tensor_file: undefined tensor");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out.write("GSL1", 4);
  const std::uint32_t rank = static_cast<std::uint32_t>(t.rank());
  out.write(reinterpret_cast<const char*>(&rank), sizeof(rank));
  for (std::size_t d : t.shape()) {
    const std::uint64_t ext = d;
    out.write(reinterpret_cast<const char*>(&ext), sizeof(ext));
  }
  const auto& data = t.data();
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
  if (!out) throw std::runtime_error("failed writing tensor file: " + path.string());
}

Tensor read_tensor_file(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  const auto fail = [&](const std::string& why) {
    throw std::runtime_error("corrupt tensor file " + path.string() + ": " + why);
  };
  if (bytes.size() < 8 || std::memcmp(bytes.data(), "GSL1", 4) != 0) fail("bad magic");
  std::uint32_t rank = 0;
  std::memcpy(&rank, bytes.data() + 4, sizeof(rank));
  if (rank == 0 || rank > 8) fail("implausible rank " + std::to_string(rank));
  std::size_t offset = 8;
  if (bytes.size() < offset + rank * 8) fail("truncated header");
  Shape shape(rank);
  std::size_t numel = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    std::uint64_t ext = 0;
    std::memcpy(&ext, bytes.data() + offset, sizeof(ext));
    offset += sizeof(ext);
    if (ext == 0 || ext > (1ULL << 32)) fail("implausible extent");
    shape[i] = static_cast<std::size_t>(ext);
    numel *= shape[i];
  }
  if (bytes.size() != offset + numel * sizeof(double)) {
    fail("payload size mismatch: expected " + std::to_string(numel * sizeof(double)) +
         " bytes, have " + std::to_string(bytes.size() - offset));
  }
  std::vector<double> data(numel);
  std::memcpy(data.data(), bytes.data() + offset, numel * sizeof(double));
  return Tensor::from_data(shape, std::move(data));
}

// ---- PGM ----

namespace {

// Reads one whitespace/comment-delimited token from a PGM header.
std::string next_pgm_token(const std::vector<unsigned char>& bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(bytes[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  std::string tok;
  while (pos < bytes.size() && !std::isspace(bytes[pos])) tok.push_back(char(bytes[pos++]));
  return tok;
}

}  // namespace

GrayImage read_pgm(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  std::size_t pos = 0;
  if (next_pgm_token(bytes, pos) != "P5") {
    throw std::runtime_error("unsupported PGM (want binary P5): " + path.string());
  }
  GrayImage img;
  try {
    img.width = std::stoul(next_pgm_token(bytes, pos));
    img.height = std::stoul(next_pgm_token(bytes, pos));
    const unsigned long maxval = std::stoul(next_pgm_token(bytes, pos));
    if (maxval == 0 || maxval > 255) {
      throw std::runtime_error("unsupported PGM maxval " + std::to_string(maxval));
    }
  } catch (const std::invalid_argument&) {
    throw std::runtime_error("malformed PGM header: " + path.string());
  }
  ++pos;  // single whitespace after maxval
  const std::size_t need = img.width * img.height;
  if (need == 0 || bytes.size() < pos + need) {
    throw std::runtime_error("truncated PGM payload: " + path.string());
  }
  img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                    bytes.begin() + static_cast<std::ptrdiff_t>(pos + need));
  return img;
}

void write_pgm(const fs::path& path, std::size_t width, std::size_t height,
               const std::vector<double>& pixels) {
  if (pixels.size() != width * height) {
    throw std::invalid_argument("write_pgm: pixel count does not match dimensions");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << "P5\n" << width << " " << height << "\n255\n";
  for (double v : pixels) {
    const double mapped = (v + 1.0) * 127.5;
    const int byte = std::clamp(static_cast<int>(std::lround(mapped)), 0, 255);
    out.put(static_cast<char>(byte));
  }
  if (!out) throw std::runtime_error("failed writing PGM: " + path.string());
}

// ---- PNG (8-bit grayscale, non-interlaced) ----

GrayImage read_png_gray8(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  static const unsigned char sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  const auto fail = [&](const std::string& why) {
    throw std::runtime_error("unreadable PNG " + path.string() + ": " + why);
  };
  if (bytes.size() < 8 || std::memcmp(bytes.data(), sig, 8) != 0) fail("bad signature");

  GrayImage img;
  std::vector<unsigned char> idat;
  bool have_header = false;
  std::size_t pos = 8;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t len = be32(&bytes[pos]);
    if (pos + 12 + len > bytes.size()) fail("truncated chunk");
    const char* type = reinterpret_cast<const char*>(&bytes[pos + 4]);
    const unsigned char* payload = &bytes[pos + 8];
    if (std::memcmp(type, "IHDR", 4) == 0) {
      if (len != 13) fail("bad IHDR");
      img.width = be32(payload);
      img.height = be32(payload + 4);
      const unsigned bit_depth = payload[8];
      const unsigned color_type = payload[9];
      const unsigned interlace = payload[12];
      if (bit_depth != 8 || color_type != 0) fail("only 8-bit grayscale is supported");
      if (interlace != 0) fail("interlaced PNG not supported");
      have_header = true;
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      idat.insert(idat.end(), payload, payload + len);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      break;
    }
    pos += 12 + len;
  }
  if (!have_header || img.width == 0 || img.height == 0) fail("missing IHDR");
  if (idat.empty()) fail("missing IDAT");

  const std::size_t stride = img.width + 1;  // filter byte per scanline
  std::vector<unsigned char> raw(stride * img.height);
  uLongf raw_len = raw.size();
  const int rc = uncompress(raw.data(), &raw_len, idat.data(), idat.size());
  if (rc != Z_OK || raw_len != raw.size()) fail("zlib inflate failed");

  img.pixels.assign(img.width * img.height, 0);
  auto paeth = [](int a, int b, int c) {
    const int p = a + b - c;
    const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
  };
  for (std::size_t y = 0; y < img.height; ++y) {
    const unsigned filter = raw[y * stride];
    const unsigned char* src = &raw[y * stride + 1];
    unsigned char* dst = &img.pixels[y * img.width];
    const unsigned char* up = y > 0 ? &img.pixels[(y - 1) * img.width] : nullptr;
    for (std::size_t x = 0; x < img.width; ++x) {
      const int a = x > 0 ? dst[x - 1] : 0;
      const int b = up ? up[x] : 0;
      const int c = (x > 0 && up) ? up[x - 1] : 0;
      int v = src[x];
      switch (filter) {
        case 0: break;
        case 1: v += a; break;
        case 2: v += b; break;
        case 3: v += (a + b) / 2; break;
        case 4: v += paeth(a, b, c); break;
        default: fail("unknown scanline filter " + std::to_string(filter));
      }
      dst[x] = static_cast<unsigned char>(v & 0xff);
    }
  }
  return img;
}

// ---- dataset ----

Tensor Dataset::batch(const std::vector<std::size_t>& indices) const {
  if (indices.empty()) throw std::invalid_argument("Dataset::batch: empty index list");
  const std::size_t px = height * width;
  std::vector<double> data;
  data.reserve(indices.size() * px);
  for (std::size_t i : indices) {
    if (i >= images.size()) throw std::out_of_range("Dataset::batch: index out of range");
    data.insert(data.end(), images[i].pixels.begin(), images[i].pixels.end());
  }
  return Tensor::from_data({indices.size(), 1, height, width}, std::move(data));
}

Tensor Dataset::image_tensor(std::size_t index) const {
  if (index >= images.size()) throw std::out_of_range("Dataset::image_tensor: index out of range");
  return Tensor::from_data({1, height, width}, images[index].pixels);
}

Dataset load_dataset(const fs::path& dir) {
  if (!fs::exists(dir) || !fs::is_directory(dir)) {
    throw std::runtime_error("dataset path is not a directory: " + dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (ext == ".pgm" || ext == ".png" || ext == ".gsl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  if (files.empty()) throw std::runtime_error("no images found in " + dir.string());

  Dataset ds;
  ds.source_dir = dir;
  for (const auto& file : files) {
    DatasetImage img;
    img.id = file.filename().string();
    std::size_t w = 0, h = 0;
    const std::string ext = file.extension().string();
    if (ext == ".gsl") {
      const Tensor t = read_tensor_file(file);
      const Shape& s = t.shape();
      if (s.size() == 2) {
        h = s[0];
        w = s[1];
      } else if (s.size() == 3 && s[0] == 1) {
        h = s[1];
        w = s[2];
      } else {
        throw std::runtime_error("tensor image must be {H,W} or {1,H,W}, got " + shape_str(s) +
                                 " in " + file.string());
      }
      img.pixels = t.data();
      for (double v : img.pixels) {
        if (v < -1.0 || v > 1.0) {
          throw std::runtime_error("tensor image values outside [-1,1] in " + file.string());
        }
      }
    } else {
      const GrayImage gi = ext == ".pgm" ? read_pgm(file) : read_png_gray8(file);
      w = gi.width;
      h = gi.height;
      img.pixels.resize(gi.pixels.size());
      for (std::size_t i = 0; i < gi.pixels.size(); ++i) {
        img.pixels[i] = static_cast<double>(gi.pixels[i]) / 127.5 - 1.0;
      }
    }
    if (ds.images.empty()) {
      ds.height = h;
      ds.width = w;
    } else if (h != ds.height || w != ds.width) {
      throw std::runtime_error("mixed dimensions in dataset: " + img.id + " is " +
                               std::to_string(w) + "x" + std::to_string(h) + ", expected " +
                               std::to_string(ds.width) + "x" + std::to_string(ds.height));
    }
    ds.images.push_back(std::move(img));
  }
  return ds;
}

// ---- key=value files ----

std::map<std::string, std::string> read_kv_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    const auto last = s.find_last_not_of(" \t\r");
    return first == std::string::npos ? std::string() : s.substr(first, last - first + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": expected key=value");
    }
    kv[trim(stripped.substr(0, eq))] = trim(stripped.substr(eq + 1));
  }
  return kv;
}

void write_kv_file(const fs::path& path,
                   const std::vector<std::pair<std::string, std::string>>& entries) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  for (const auto& [k, v] : entries) out << k << "=" << v << "\n";
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace gsgan
