#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace prefpol {

using Rgb = std::array<std::uint8_t, 3>;

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // 3 bytes per pixel, row-major

  Image() = default;
  Image(int w, int h, Rgb fill);

  void set(int x, int y, Rgb c);
  Rgb at(int x, int y) const;

  bool operator==(const Image&) const = default;
};

void draw_disc(Image& img, double cx, double cy, double radius, Rgb c);
void draw_rect(Image& img, int x0, int y0, int x1, int y1, Rgb c);

// Binary PPM (P6).
std::string to_ppm(const Image& img);

// Minimal PNG: stored (uncompressed) deflate blocks, deterministic bytes.
std::string to_png(const Image& img);

void write_bytes(const std::string& path, const std::string& bytes);

}  // namespace prefpol
