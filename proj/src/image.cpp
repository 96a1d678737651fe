#include "prefpol/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "prefpol/errors.hpp"
#include "prefpol/hash.hpp"

namespace prefpol {

Image::Image(int w, int h, Rgb fill)
    : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3) {
  for (int i = 0; i < w * h; ++i) {
    rgb[3 * i] = fill[0];
    rgb[3 * i + 1] = fill[1];
    rgb[3 * i + 2] = fill[2];
  }
}

void Image::set(int x, int y, Rgb c) {
  if (x < 0 || y < 0 || x >= width || y >= height) return;
  std::size_t i = 3 * (static_cast<std::size_t>(y) * width + x);
  rgb[i] = c[0];
  rgb[i + 1] = c[1];
  rgb[i + 2] = c[2];
}

Rgb Image::at(int x, int y) const {
  std::size_t i = 3 * (static_cast<std::size_t>(y) * width + x);
  return {rgb[i], rgb[i + 1], rgb[i + 2]};
}

void draw_disc(Image& img, double cx, double cy, double radius, Rgb c) {
  const int x0 = static_cast<int>(std::floor(cx - radius));
  const int x1 = static_cast<int>(std::ceil(cx + radius));
  const int y0 = static_cast<int>(std::floor(cy - radius));
  const int y1 = static_cast<int>(std::ceil(cy + radius));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      double dx = x - cx, dy = y - cy;
      if (dx * dx + dy * dy <= radius * radius) img.set(x, y, c);
    }
}

void draw_rect(Image& img, int x0, int y0, int x1, int y1, Rgb c) {
  for (int y = std::min(y0, y1); y <= std::max(y0, y1); ++y)
    for (int x = std::min(x0, x1); x <= std::max(x0, x1); ++x)
      img.set(x, y, c);
}

std::string to_ppm(const Image& img) {
  std::string out = "P6\n" + std::to_string(img.width) + " " +
                    std::to_string(img.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.rgb.data()), img.rgb.size());
  return out;
}

namespace {

void put_be32(std::string& out, std::uint32_t v) {
  out += static_cast<char>((v >> 24) & 0xff);
  out += static_cast<char>((v >> 16) & 0xff);
  out += static_cast<char>((v >> 8) & 0xff);
  out += static_cast<char>(v & 0xff);
}

void put_chunk(std::string& out, const char type[4], const std::string& body) {
  put_be32(out, static_cast<std::uint32_t>(body.size()));
  std::string tb(type, 4);
  tb += body;
  out += tb;
  put_be32(out, crc32(tb.data(), tb.size()));
}

std::uint32_t adler32(const std::string& s) {
  std::uint32_t a = 1, b = 0;
  for (unsigned char c : s) {
    a = (a + c) % 65521;
    b = (b + a) % 65521;
  }
  return (b << 16) | a;
}

// zlib stream made of stored (type 0) deflate blocks.
std::string deflate_stored(const std::string& raw) {
  std::string out;
  out += static_cast<char>(0x78);  // CMF: deflate, 32K window
  out += static_cast<char>(0x01);  // FLG with valid check bits
  std::size_t pos = 0;
  do {
    std::size_t n = std::min<std::size_t>(raw.size() - pos, 65535);
    bool last = pos + n == raw.size();
    out += static_cast<char>(last ? 1 : 0);
    out += static_cast<char>(n & 0xff);
    out += static_cast<char>((n >> 8) & 0xff);
    out += static_cast<char>(~n & 0xff);
    out += static_cast<char>((~n >> 8) & 0xff);
    out.append(raw, pos, n);
    pos += n;
  } while (pos < raw.size());
  std::string a;
  put_be32(a, adler32(raw));
  return out + a;
}

}  // namespace

std::string to_png(const Image& img) {
  std::string out("\x89PNG\r\n\x1a\n", 8);

  std::string ihdr;
  put_be32(ihdr, static_cast<std::uint32_t>(img.width));
  put_be32(ihdr, static_cast<std::uint32_t>(img.height));
  ihdr += static_cast<char>(8);  // bit depth
  ihdr += static_cast<char>(2);  // color type: truecolor
  ihdr += static_cast<char>(0);
  ihdr += static_cast<char>(0);
  ihdr += static_cast<char>(0);
  put_chunk(out, "IHDR", ihdr);

  std::string raw;
  raw.reserve(static_cast<std::size_t>(img.height) * (1 + 3 * img.width));
  for (int y = 0; y < img.height; ++y) {
    raw += static_cast<char>(0);  // filter: none
    raw.append(
        reinterpret_cast<const char*>(img.rgb.data() +
                                      3 * static_cast<std::size_t>(y) *
                                          img.width),
        3 * static_cast<std::size_t>(img.width));
  }
  put_chunk(out, "IDAT", deflate_stored(raw));
  put_chunk(out, "IEND", "");
  return out;
}

void write_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("short write to " + path);
}

}  // namespace prefpol
