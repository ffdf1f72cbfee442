#include "edgeflow/image.hpp"

#include <algorithm>
#include <string>

#include "edgeflow/error.hpp"

namespace edgeflow {

namespace {

std::size_t checked_area(int width, int height) {
  if (width < 1 || height < 1) {
    throw Error("image dimensions must be positive, got " + std::to_string(width) + "x" + std::to_string(height));
  }
  return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
}

}  // namespace

RgbImage::RgbImage(int width, int height, Rgb fill) : width_(width), height_(height) {
  const std::size_t n = checked_area(width, height);
  data_.resize(n * 3);
  for (std::size_t i = 0; i < n; ++i) {
    data_[3 * i] = fill.r;
    data_[3 * i + 1] = fill.g;
    data_[3 * i + 2] = fill.b;
  }
}

RgbImage::RgbImage(int width, int height, std::vector<std::uint8_t> interleaved)
    : width_(width), height_(height), data_(std::move(interleaved)) {
  if (data_.size() != checked_area(width, height) * 3) {
    throw Error("RGB buffer size does not match " + std::to_string(width) + "x" + std::to_string(height));
  }
}

GrayImage::GrayImage(int width, int height, std::uint8_t fill)
    : width_(width), height_(height), data_(checked_area(width, height), fill) {}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), data_(std::move(pixels)) {
  if (data_.size() != checked_area(width, height)) {
    throw Error("gray buffer size does not match " + std::to_string(width) + "x" + std::to_string(height));
  }
}

EdgeMap::EdgeMap(int width, int height, bool fill)
    : width_(width), height_(height), data_(checked_area(width, height), fill ? 1 : 0) {}

std::size_t EdgeMap::count() const noexcept {
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

}  // namespace edgeflow
