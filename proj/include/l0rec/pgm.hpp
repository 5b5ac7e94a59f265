#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace l0rec {

/// 8-bit grayscale image, row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  std::size_t size() const { return pixels.size(); }
};

inline constexpr std::size_t kMaxImagePixels = std::size_t{1} << 22;

/// Binary PGM (P5) with maxval <= 255. Comments and arbitrary whitespace in
/// the header are accepted; anything else throws std::runtime_error.
GrayImage read_pgm(std::istream& is);
GrayImage read_pgm_file(const std::string& path);
void write_pgm(std::ostream& os, const GrayImage& img);
void write_pgm_file(const std::string& path, const GrayImage& img);

/// Black image with k nonzero pixels at random positions, drawn as a few
/// bright blobs and scattered points (values 1..255).
GrayImage synthetic_sparse_image(int width, int height, int k, std::uint64_t seed);

}  // namespace l0rec
