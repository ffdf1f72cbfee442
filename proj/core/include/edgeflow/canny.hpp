#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "edgeflow/image.hpp"

namespace edgeflow {

/// Canny detector settings. Thresholds apply to the Euclidean Sobel
/// magnitude of the smoothed 8-bit image.
struct CannyParams {
  double gaussian_sigma = 1.4;
  double low_threshold = 50.0;
  double high_threshold = 100.0;

  /// Throws edgeflow::Error unless sigma > 0 and 0 <= low <= high.
  void validate() const;

  bool operator==(const CannyParams&) const = default;
};

/// Luma conversion: round(0.299 R + 0.587 G + 0.114 B).
GrayImage to_grayscale(const RgbImage& img);

/// Normalized 1-D Gaussian taps for radius ceil(3 sigma).
std::vector<double> gaussian_kernel(double sigma);

/// Separable Gaussian smoothing with edge-clamp borders, rounded back to
/// 8 bits. Throws for sigma <= 0.
GrayImage gaussian_blur(const GrayImage& img, double sigma);

/// Gradient direction quantized to the axis a non-maximum test compares
/// along: 0 = horizontal gradient (0 deg), 1 = 45 deg, 2 = vertical, 3 = 135 deg.
enum class GradientBin : std::uint8_t { deg0 = 0, deg45 = 1, deg90 = 2, deg135 = 3 };

struct GradientField {
  int width = 0;
  int height = 0;
  std::vector<double> magnitude;
  std::vector<GradientBin> direction;
};

/// 3x3 Sobel with edge-clamp borders. Image y grows downward, so a 45 deg
/// gradient points toward (x+1, y+1).
GradientField sobel_gradients(const GrayImage& img);

/// Keeps a magnitude only when it is a local maximum across its gradient
/// direction (strictly above the backward neighbor, not below the forward
/// one); everything else becomes 0.
std::vector<double> suppress_non_maxima(const GradientField& field);

/// Double-threshold linking. Pixels >= high seed edges; pixels in
/// [low, high) join when 8-connected, transitively, to a seed.
EdgeMap hysteresis(int width, int height, std::span<const double> magnitude, double low, double high);

/// Full chain: blur, Sobel, non-maximum suppression, hysteresis.
/// Throws for images smaller than 3x3 or invalid params.
EdgeMap canny(const GrayImage& img, const CannyParams& params = {});

}  // namespace edgeflow
