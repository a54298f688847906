#include "udderid/lbp.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

#include "udderid/error.hpp"

namespace udderid {
namespace {

// Sign of p + q*sqrt(2) for integers p, q, computed without rounding.
int sign_sqrt2(long long p, long long q) {
  if (p >= 0 && q >= 0) return (p == 0 && q == 0) ? 0 : 1;
  if (p <= 0 && q <= 0) return -1;
  const long long p2 = p * p;
  const long long q2 = 2 * q * q;
  if (p > 0) return p2 > q2 ? 1 : (p2 == q2 ? 0 : -1);
  return q2 > p2 ? 1 : (p2 == q2 ? 0 : -1);
}

// True iff the bilinear sample at a radius-2 diagonal lies strictly below the
// center. With a = sqrt(2) - 1 the weights are (1-a)^2 on the near pixel, a^2
// on the far pixel and a(1-a) on each side pixel, which expands to
// (6 dn + 3 df - 4 ds) + sqrt(2) (-4 dn - 2 df + 3 ds) for the differences
// to the center.
bool diagonal_below(int center, int near, int far, int side_a, int side_b) {
  const long long dn = near - center;
  const long long df = far - center;
  const long long ds = static_cast<long long>(side_a) + side_b - 2LL * center;
  return sign_sqrt2(6 * dn + 3 * df - 4 * ds, -4 * dn - 2 * df + 3 * ds) < 0;
}

// Counter-clockwise unit directions in y-down image coordinates.
constexpr std::array<int, 8> kDx = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr std::array<int, 8> kDy = {0, -1, -1, -1, 0, 1, 1, 1};

void check_radius(int radius) {
  if (radius != 1 && radius != 2) {
    throw Error(ErrorCode::InvalidArgument, "LBP radius must be 1 or 2, got " + std::to_string(radius));
  }
}

}  // namespace

NecklaceTable build_necklace_table() {
  std::array<std::uint8_t, 256> canonical{};
  for (int code = 0; code < 256; ++code) {
    auto best = static_cast<std::uint8_t>(code);
    for (int r = 1; r < 8; ++r) best = std::min(best, rotate_code(static_cast<std::uint8_t>(code), r));
    canonical[code] = best;
  }

  std::array<bool, 256> seen{};
  for (const std::uint8_t c : canonical) seen[c] = true;

  NecklaceTable table;
  std::array<std::uint8_t, 256> rank_of{};
  int next = 0;
  for (int c = 0; c < 256; ++c) {
    if (!seen[c]) continue;
    table.canonical_codes.at(next) = static_cast<std::uint8_t>(c);
    rank_of[c] = static_cast<std::uint8_t>(next++);
  }
  for (int code = 0; code < 256; ++code) table.class_of_code[code] = rank_of[canonical[code]];
  return table;
}

const NecklaceTable& necklace_table() {
  static const NecklaceTable table = build_necklace_table();
  return table;
}

std::uint8_t lbp_code(int center, const std::array<int, 8>& neighbors) {
  unsigned code = 0;
  for (int k = 0; k < 8; ++k) {
    if (center > neighbors[k]) code |= 1U << k;
  }
  return static_cast<std::uint8_t>(code);
}

Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> lbp_codes(
    const GrayImage& img, int radius) {
  check_radius(radius);
  const Eigen::Index w = img.cols();
  const Eigen::Index h = img.rows();
  if (w <= 2 * radius || h <= 2 * radius) {
    throw Error(ErrorCode::ImageTooSmall, std::to_string(w) + "x" + std::to_string(h) +
                                              " has no valid center at radius " + std::to_string(radius));
  }

  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> codes(
      h - 2 * radius, w - 2 * radius);
  for (Eigen::Index y = radius; y < h - radius; ++y) {
    for (Eigen::Index x = radius; x < w - radius; ++x) {
      const int c = img(y, x);
      unsigned code = 0;
      for (int k = 0; k < 8; ++k) {
        const int dx = kDx[k];
        const int dy = kDy[k];
        bool below = false;
        if (radius == 1 || dx == 0 || dy == 0) {
          below = c > img(y + radius * dy, x + radius * dx);
        } else {
          below = diagonal_below(c, img(y + dy, x + dx), img(y + 2 * dy, x + 2 * dx),
                                 img(y + dy, x + 2 * dx), img(y + 2 * dy, x + dx));
        }
        if (below) code |= 1U << k;
      }
      codes(y - radius, x - radius) = static_cast<std::uint8_t>(code);
    }
  }
  return codes;
}

LbpHistogram lbp_histogram(const GrayImage& img, int radius) {
  const auto codes = lbp_codes(img, radius);
  const NecklaceTable& table = necklace_table();
  Eigen::Matrix<long long, kNecklaceClasses, 1> counts = Eigen::Matrix<long long, kNecklaceClasses, 1>::Zero();
  for (Eigen::Index i = 0; i < codes.size(); ++i) ++counts(table.class_of_code[codes.data()[i]]);
  return counts.cast<double>() / static_cast<double>(codes.size());
}

TextureFeatures texture_features(const GrayImage& img) {
  return {lbp_histogram(img, 1), lbp_histogram(img, 2)};
}

}  // namespace udderid
