#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Core>

#include "udderid/image.hpp"

namespace udderid {

inline constexpr int kNecklaceClasses = 36;

/// Partition of the 256 eight-bit codes into classes closed under cyclic bit
/// rotation. Class i holds the i-th smallest rotation-minimal code.
struct NecklaceTable {
  std::array<std::uint8_t, 256> class_of_code{};
  std::array<std::uint8_t, kNecklaceClasses> canonical_codes{};
};

NecklaceTable build_necklace_table();

/// Process-wide immutable instance.
const NecklaceTable& necklace_table();

/// Rotates an 8-bit code left by `steps` bit positions.
constexpr std::uint8_t rotate_code(std::uint8_t code, int steps) {
  steps &= 7;
  return static_cast<std::uint8_t>((code << steps) | (code >> ((8 - steps) & 7)));
}

/// Bit k is set iff center > neighbors[k]. Neighbors run counter-clockwise
/// starting at angle 0 (the pixel to the right of the center).
std::uint8_t lbp_code(int center, const std::array<int, 8>& neighbors);

using LbpHistogram = Eigen::Matrix<double, kNecklaceClasses, 1>;

/// Code per valid center: entry (y - radius, x - radius) holds the code of
/// pixel (x, y). Only centers whose whole sample circle lies inside the image
/// are included. Throws ImageTooSmall when there are none.
Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> lbp_codes(
    const GrayImage& img, int radius);

/// Rotation-invariant LBP histogram at radius 1 or 2, normalized by the
/// number of valid centers.
///
/// Radius 1 samples the eight adjacent pixels. Radius 2 samples the circle of
/// radius 2 at 45 degree steps: the four axis points are exact pixels and the
/// four diagonal points are bilinear interpolations. The diagonal comparison
/// is evaluated exactly in Z[sqrt(2)], so ties and shifts behave identically
/// to the radius-1 case.
LbpHistogram lbp_histogram(const GrayImage& img, int radius);

struct TextureFeatures {
  LbpHistogram hist_r1 = LbpHistogram::Zero();
  LbpHistogram hist_r2 = LbpHistogram::Zero();

  /// r1 classes 0..35 followed by r2 classes 0..35.
  Eigen::Matrix<double, 2 * kNecklaceClasses, 1> flatten() const {
    Eigen::Matrix<double, 2 * kNecklaceClasses, 1> out;
    out << hist_r1, hist_r2;
    return out;
  }
};

TextureFeatures texture_features(const GrayImage& img);

}  // namespace udderid
