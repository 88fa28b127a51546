#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace declutter {

struct Pixel {
  int x = 0;
  int y = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

struct Rgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct Lab {
  double l = 0.0;
  double a = 0.0;
  double b = 0.0;
};

/// Dense row-major image.
template <typename T>
class Image {
 public:
  Image() = default;
  Image(int width, int height, T fill = T{})
      : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height, fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
  bool contains(Pixel p) const { return contains(p.x, p.y); }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }
  T& operator[](Pixel p) { return (*this)(p.x, p.y); }
  const T& operator[](Pixel p) const { return (*this)(p.x, p.y); }

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  std::span<T> pixels() { return data_; }
  std::span<const T> pixels() const { return data_; }
  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using RgbImage = Image<Rgb>;
using GrayImage = Image<double>;
using DepthImage = Image<double>;
using BinaryMask = Image<std::uint8_t>;

/// Rotates an image by 90 degrees counter-clockwise as displayed (x right,
/// y down): source pixel (x, y) lands at (y, W-1-x).
template <typename T>
Image<T> rotate90(const Image<T>& src) {
  Image<T> out(src.height(), src.width());
  for (int y = 0; y < src.height(); ++y)
    for (int x = 0; x < src.width(); ++x) out(y, src.width() - 1 - x) = src(x, y);
  return out;
}

/// Pixel mapping matching rotate90.
inline Pixel rotate90(Pixel p, int src_width) { return {p.y, src_width - 1 - p.x}; }

/// Bilinear sample; caller guarantees 0 <= x <= W-1 and 0 <= y <= H-1.
double bilinear(const GrayImage& img, double x, double y);

// Netpbm writers. 16-bit PGM is big-endian per the format.
void write_pgm16(const std::filesystem::path& path, const Image<std::uint16_t>& img);
void write_ppm8(const std::filesystem::path& path, const RgbImage& img);
Image<std::uint16_t> read_pgm16(const std::filesystem::path& path);

}  // namespace declutter
