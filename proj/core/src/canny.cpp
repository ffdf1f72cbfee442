#include "edgeflow/canny.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "edgeflow/error.hpp"

namespace edgeflow {

void CannyParams::validate() const {
  if (!(gaussian_sigma > 0.0) || !std::isfinite(gaussian_sigma)) {
    throw Error("canny: sigma must be > 0, got " + std::to_string(gaussian_sigma));
  }
  if (!(low_threshold >= 0.0) || !std::isfinite(high_threshold)) {
    throw Error("canny: thresholds must be finite and >= 0");
  }
  if (high_threshold < low_threshold) {
    throw Error("canny: high threshold " + std::to_string(high_threshold) + " is below low threshold " +
                std::to_string(low_threshold));
  }
}

GrayImage to_grayscale(const RgbImage& img) {
  GrayImage out(img.width(), img.height());
  const auto src = img.bytes();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    // Integer form of round-half-up(0.299 R + 0.587 G + 0.114 B).
    const unsigned sum = 299u * src[3 * i] + 587u * src[3 * i + 1] + 114u * src[3 * i + 2];
    dst[i] = static_cast<std::uint8_t>(std::min(255u, (sum + 500u) / 1000u));
  }
  return out;
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error("gaussian_blur: sigma must be > 0, got " + std::to_string(sigma));
  }
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double w = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
    taps[static_cast<std::size_t>(i + radius)] = w;
    sum += w;
  }
  for (double& w : taps) w /= sum;
  return taps;
}

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
  const std::vector<double> taps = gaussian_kernel(sigma);
  const int radius = static_cast<int>(taps.size() / 2);
  const int w = img.width();
  const int h = img.height();

  std::vector<double> horizontal(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const int sx = std::clamp(x + k, 0, w - 1);
        acc += taps[static_cast<std::size_t>(k + radius)] * img(sx, y);
      }
      horizontal[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }

  GrayImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const int sy = std::clamp(y + k, 0, h - 1);
        acc += taps[static_cast<std::size_t>(k + radius)] * horizontal[static_cast<std::size_t>(sy) * w + x];
      }
      out(x, y) = static_cast<std::uint8_t>(std::clamp(std::floor(acc + 0.5), 0.0, 255.0));
    }
  }
  return out;
}

namespace {

GradientBin quantize_direction(int gx, int gy) {
  double degrees = std::atan2(static_cast<double>(gy), static_cast<double>(gx)) * (180.0 / std::numbers::pi);
  if (degrees < 0.0) degrees += 180.0;
  if (degrees < 22.5 || degrees >= 157.5) return GradientBin::deg0;
  if (degrees < 67.5) return GradientBin::deg45;
  if (degrees < 112.5) return GradientBin::deg90;
  return GradientBin::deg135;
}

struct Step {
  int dx;
  int dy;
};

constexpr Step step_for(GradientBin bin) {
  switch (bin) {
    case GradientBin::deg0: return {1, 0};
    case GradientBin::deg45: return {1, 1};
    case GradientBin::deg90: return {0, 1};
    case GradientBin::deg135: return {-1, 1};
  }
  return {1, 0};
}

}  // namespace

GradientField sobel_gradients(const GrayImage& img) {
  const int w = img.width();
  const int h = img.height();
  GradientField field;
  field.width = w;
  field.height = h;
  field.magnitude.resize(static_cast<std::size_t>(w) * h);
  field.direction.resize(field.magnitude.size());

  for (int y = 0; y < h; ++y) {
    const int ym = std::max(y - 1, 0);
    const int yp = std::min(y + 1, h - 1);
    for (int x = 0; x < w; ++x) {
      const int xm = std::max(x - 1, 0);
      const int xp = std::min(x + 1, w - 1);
      const int gx = (img(xp, ym) + 2 * img(xp, y) + img(xp, yp)) - (img(xm, ym) + 2 * img(xm, y) + img(xm, yp));
      const int gy = (img(xm, yp) + 2 * img(x, yp) + img(xp, yp)) - (img(xm, ym) + 2 * img(x, ym) + img(xp, ym));
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      field.magnitude[i] = std::sqrt(static_cast<double>(gx) * gx + static_cast<double>(gy) * gy);
      field.direction[i] = quantize_direction(gx, gy);
    }
  }
  return field;
}

std::vector<double> suppress_non_maxima(const GradientField& field) {
  const int w = field.width;
  const int h = field.height;
  std::vector<double> out(field.magnitude.size(), 0.0);
  auto mag_at = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= w || y >= h) return 0.0;
    return field.magnitude[static_cast<std::size_t>(y) * w + x];
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const double m = field.magnitude[i];
      if (m <= 0.0) continue;
      const Step s = step_for(field.direction[i]);
      const double forward = mag_at(x + s.dx, y + s.dy);
      const double backward = mag_at(x - s.dx, y - s.dy);
      if (m > backward && m >= forward) out[i] = m;
    }
  }
  return out;
}

EdgeMap hysteresis(int width, int height, std::span<const double> magnitude, double low, double high) {
  if (magnitude.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error("hysteresis: magnitude buffer does not match " + std::to_string(width) + "x" + std::to_string(height));
  }
  EdgeMap edges(width, height);
  auto cells = edges.cells();
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < magnitude.size(); ++i) {
    if (magnitude[i] >= high && magnitude[i] > 0.0 && cells[i] == 0) {
      cells[i] = 1;
      stack.push_back(i);
    }
  }
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    const int x = static_cast<int>(i % static_cast<std::size_t>(width));
    const int y = static_cast<int>(i / static_cast<std::size_t>(width));
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = x + dx;
        const int ny = y + dy;
        if ((dx == 0 && dy == 0) || nx < 0 || ny < 0 || nx >= width || ny >= height) continue;
        const std::size_t j = static_cast<std::size_t>(ny) * width + nx;
        if (cells[j] == 0 && magnitude[j] >= low && magnitude[j] > 0.0) {
          cells[j] = 1;
          stack.push_back(j);
        }
      }
    }
  }
  return edges;
}

EdgeMap canny(const GrayImage& img, const CannyParams& params) {
  params.validate();
  if (img.width() < 3 || img.height() < 3) {
    throw Error("canny: image must be at least 3x3, got " + std::to_string(img.width()) + "x" +
                std::to_string(img.height()));
  }
  const GrayImage smoothed = gaussian_blur(img, params.gaussian_sigma);
  const GradientField field = sobel_gradients(smoothed);
  const std::vector<double> thin = suppress_non_maxima(field);
  return hysteresis(img.width(), img.height(), thin, params.low_threshold, params.high_threshold);
}

}  // namespace edgeflow
