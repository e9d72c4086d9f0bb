#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace veinforge {

/// Row-major grayscale image with intensities in [0, 1].
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, double fill = 0.0);
  GrayImage(int width, int height, std::vector<double> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return pixels_.size(); }
  bool empty() const { return pixels_.empty(); }

  double& at(int x, int y) { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
  double at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }

  /// Bilinear sample with edge clamping; coordinates in pixel units.
  double sample(double x, double y) const;

  std::span<double> pixels() { return pixels_; }
  std::span<const double> pixels() const { return pixels_; }

  double mean() const;
  double min() const;
  double max() const;

  /// Clamp every pixel into [0, 1].
  void clamp();

  /// 8-bit quantization used by every exporter.
  std::vector<unsigned char> to_bytes() const;
  static GrayImage from_bytes(int width, int height, std::span<const unsigned char> bytes);

  bool operator==(const GrayImage&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> pixels_;
};

class ImageIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_png(const GrayImage& image, const std::filesystem::path& path);
void write_pgm(const GrayImage& image, const std::filesystem::path& path);
/// Reads 8/16-bit grayscale or RGB(A) PNG; color is converted to luma.
GrayImage read_png(const std::filesystem::path& path);
GrayImage read_pgm(const std::filesystem::path& path);
/// Dispatches on extension (.png, .pgm).
GrayImage read_image(const std::filesystem::path& path);

/// Bilinear resample to the requested size.
GrayImage resample(const GrayImage& image, int width, int height);

}  // namespace veinforge
