#include "declutter/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "declutter/errors.hpp"

namespace declutter {

double bilinear(const GrayImage& img, double x, double y) {
  const int x0 = std::clamp(static_cast<int>(std::floor(x)), 0, img.width() - 1);
  const int y0 = std::clamp(static_cast<int>(std::floor(y)), 0, img.height() - 1);
  const int x1 = std::min(x0 + 1, img.width() - 1);
  const int y1 = std::min(y0 + 1, img.height() - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  // a + f * (b - a) form: exact wherever the neighbourhood is constant.
  const double top = img(x0, y0) + fx * (img(x1, y0) - img(x0, y0));
  const double bot = img(x0, y1) + fx * (img(x1, y1) - img(x0, y1));
  return top + fy * (bot - top);
}

void write_pgm16(const std::filesystem::path& path, const Image<std::uint16_t>& img) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << "P5\n" << img.width() << ' ' << img.height() << "\n65535\n";
  for (const std::uint16_t v : img.pixels()) {
    const char bytes[2] = {static_cast<char>(v >> 8), static_cast<char>(v & 0xFF)};
    os.write(bytes, 2);
  }
}

void write_ppm8(const std::filesystem::path& path, const RgbImage& img) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << "P6\n" << img.width() << ' ' << img.height() << "\n255\n";
  auto q = [](double c) {
    return static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0)));
  };
  for (const Rgb& p : img.pixels()) {
    const char bytes[3] = {q(p.r), q(p.g), q(p.b)};
    os.write(bytes, 3);
  }
}

Image<std::uint16_t> read_pgm16(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  is >> magic >> w >> h >> maxval;
  if (magic != "P5" || w <= 0 || h <= 0 || maxval != 65535) throw Error("unsupported PGM: " + path.string());
  is.get();
  Image<std::uint16_t> img(w, h);
  for (std::uint16_t& v : img.pixels()) {
    unsigned char bytes[2];
    is.read(reinterpret_cast<char*>(bytes), 2);
    v = static_cast<std::uint16_t>((bytes[0] << 8) | bytes[1]);
  }
  if (!is) throw Error("truncated PGM: " + path.string());
  return img;
}

}  // namespace declutter
