#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace edgeflow {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  bool operator==(const Rgb&) const = default;
};

/// 8-bit RGB raster, row-major, three bytes per pixel.
class RgbImage {
 public:
  RgbImage() = default;
  RgbImage(int width, int height, Rgb fill = {});
  RgbImage(int width, int height, std::vector<std::uint8_t> interleaved);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }

  Rgb at(int x, int y) const noexcept {
    const std::size_t i = index(x, y);
    return {data_[i], data_[i + 1], data_[i + 2]};
  }
  void set(int x, int y, Rgb c) noexcept {
    const std::size_t i = index(x, y);
    data_[i] = c.r;
    data_[i + 1] = c.g;
    data_[i + 2] = c.b;
  }

  std::span<const std::uint8_t> bytes() const noexcept { return data_; }
  std::span<std::uint8_t> bytes() noexcept { return data_; }

  bool operator==(const RgbImage&) const = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) * 3;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// 8-bit single-channel raster, row-major.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, std::uint8_t fill = 0);
  GrayImage(int width, int height, std::vector<std::uint8_t> pixels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }

  std::uint8_t operator()(int x, int y) const noexcept { return data_[index(x, y)]; }
  std::uint8_t& operator()(int x, int y) noexcept { return data_[index(x, y)]; }

  std::span<const std::uint8_t> pixels() const noexcept { return data_; }
  std::span<std::uint8_t> pixels() noexcept { return data_; }

  bool operator==(const GrayImage&) const = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Binary edge raster. Cells hold 0 (background) or 1 (edge pixel).
class EdgeMap {
 public:
  EdgeMap() = default;
  EdgeMap(int width, int height, bool fill = false);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }

  bool operator()(int x, int y) const noexcept { return data_[index(x, y)] != 0; }
  void set(int x, int y, bool edge) noexcept { data_[index(x, y)] = edge ? 1 : 0; }

  /// Raw 0/1 cells, row-major. Writers must store only 0 or 1.
  std::span<const std::uint8_t> cells() const noexcept { return data_; }
  std::span<std::uint8_t> cells() noexcept { return data_; }

  /// Number of edge pixels.
  std::size_t count() const noexcept;

  bool same_shape(int width, int height) const noexcept { return width_ == width && height_ == height; }

  bool operator==(const EdgeMap&) const = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

}  // namespace edgeflow
