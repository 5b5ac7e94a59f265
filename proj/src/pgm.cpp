#include "l0rec/pgm.hpp"

#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "l0rec/rng.hpp"

namespace l0rec {

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& is) {
  std::string tok;
  int c;
  while ((c = is.get()) != EOF) {
    if (c == '#') {
      while ((c = is.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok += static_cast<char>(c);
  }
  if (tok.empty()) throw std::runtime_error("truncated PGM header");
  return tok;
}

int header_int(std::istream& is, const char* what) {
  const std::string tok = header_token(is);
  std::size_t pos = 0;
  int v = 0;
  try {
    v = std::stoi(tok, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != tok.size() || v <= 0) throw std::runtime_error(std::string("bad PGM ") + what + " '" + tok + "'");
  return v;
}

}  // namespace

GrayImage read_pgm(std::istream& is) {
  if (header_token(is) != "P5") throw std::runtime_error("not a binary PGM (P5) image");
  GrayImage img;
  img.width = header_int(is, "width");
  img.height = header_int(is, "height");
  const int maxval = header_int(is, "maxval");
  if (maxval > 255) throw std::runtime_error("only 8-bit PGM images are supported");
  const auto n = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
  if (n > kMaxImagePixels) throw std::runtime_error("image too large (" + std::to_string(n) + " pixels)");
  img.pixels.resize(n);
  is.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(is.gcount()) != n) throw std::runtime_error("truncated PGM pixel data");
  return img;
}

GrayImage read_pgm_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open image '" + path + "'");
  return read_pgm(in);
}

void write_pgm(std::ostream& os, const GrayImage& img) {
  if (img.pixels.size() != static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height)) {
    throw std::invalid_argument("image pixel count does not match its dimensions");
  }
  os << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  os.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
}

void write_pgm_file(const std::string& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write image '" + path + "'");
  write_pgm(out, img);
}

GrayImage synthetic_sparse_image(int width, int height, int k, std::uint64_t seed) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("image dimensions must be positive");
  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (k < 0 || static_cast<std::size_t>(k) > n) throw std::invalid_argument("nonzero pixel count out of range");
  GrayImage img{width, height, std::vector<std::uint8_t>(n, 0)};
  CounterStream rng(seed, Stream::kImage);
  int placed = 0;
  while (placed < k) {
    // Half the pixels go into small 3x3 blobs so the picture has structure.
    const bool blob = placed < k / 2 && k - placed >= 2;
    const auto cx = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(width)));
    const auto cy = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(height)));
    const int r = blob ? 1 : 0;
    for (int dy = -r; dy <= r && placed < k; ++dy) {
      for (int dx = -r; dx <= r && placed < k; ++dx) {
        const int x = cx + dx;
        const int y = cy + dy;
        if (x < 0 || y < 0 || x >= width || y >= height) continue;
        auto& px = img.pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
        if (px != 0) continue;
        px = static_cast<std::uint8_t>(1 + rng.next_below(255));
        ++placed;
      }
    }
  }
  return img;
}

}  // namespace l0rec
