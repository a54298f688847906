#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "udderid/error.hpp"

namespace udderid {

/// Teat positions in cyclic quadrilateral order: left-front, right-front,
/// right-rear, left-rear. The enumerator value is the index into every
/// per-teat array in this module.
enum class TeatPosition { LF = 0, RF = 1, RR = 2, LR = 3 };

inline constexpr std::array<TeatPosition, 4> kTeatOrder = {TeatPosition::LF, TeatPosition::RF,
                                                            TeatPosition::RR, TeatPosition::LR};

std::string_view to_string(TeatPosition position);
std::optional<TeatPosition> parse_teat_position(std::string_view text);

struct Box {
  double x = 0;
  double y = 0;
  double w = 0;
  double h = 0;

  friend bool operator==(const Box&, const Box&) = default;
};

struct TeatBox {
  TeatPosition position = TeatPosition::LF;
  Box box;

  friend bool operator==(const TeatBox&, const TeatBox&) = default;
};

/// Four teat boxes plus the udder box for one preprocessed frame. The teats
/// array is indexed by TeatPosition, so "one box per position" holds by
/// construction.
struct UdderAnnotation {
  std::string image_ref;
  Box udder_box;
  std::array<Box, 4> teats{};

  const Box& teat(TeatPosition p) const { return teats[static_cast<std::size_t>(p)]; }
  Box& teat(TeatPosition p) { return teats[static_cast<std::size_t>(p)]; }

  friend bool operator==(const UdderAnnotation&, const UdderAnnotation&) = default;
};

/// Throws NonPositiveBox if any box has w <= 0 or h <= 0 (or non-finite fields).
void validate(const UdderAnnotation& ann);

template <typename Scalar>
using Point2 = Eigen::Matrix<Scalar, 2, 1>;

/// Teat centers in LF, RF, RR, LR order.
template <typename Scalar>
using TeatQuad = std::array<Point2<Scalar>, 4>;

template <typename Scalar>
using Vector4 = Eigen::Matrix<Scalar, 4, 1>;

inline constexpr int kGeometryDims = 17;

template <typename Scalar>
struct GeometricFeatures {
  Vector4<Scalar> distances;  // LF-RF, RF-RR, RR-LR, LR-LF
  Vector4<Scalar> angles;     // degrees at LF, RF, RR, LR
  Vector4<Scalar> sizes;      // teat box areas
  Vector4<Scalar> aspects;    // teat box w / h
  Scalar udder_aspect{};

  Eigen::Matrix<Scalar, kGeometryDims, 1> flatten() const {
    Eigen::Matrix<Scalar, kGeometryDims, 1> out;
    out << distances, angles, sizes, aspects, udder_aspect;
    return out;
  }
};

inline Point2<double> box_center(const Box& b) { return {b.x + b.w / 2, b.y + b.h / 2}; }

inline TeatQuad<double> teat_centers(const UdderAnnotation& ann) {
  TeatQuad<double> out;
  for (std::size_t i = 0; i < 4; ++i) out[i] = box_center(ann.teats[i]);
  return out;
}

enum class ConvexOrder { Valid, Degenerate };

/// Valid iff the cyclic polygon LF->RF->RR->LR is strictly convex with a
/// consistent winding: the z-components of consecutive edge cross products
/// are all nonzero and share one sign.
template <typename Scalar>
ConvexOrder check_convex_order(const TeatQuad<Scalar>& c) {
  int positive = 0;
  int negative = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const Point2<Scalar> e1 = c[(i + 1) % 4] - c[i];
    const Point2<Scalar> e2 = c[(i + 2) % 4] - c[(i + 1) % 4];
    const Scalar cross = e1.x() * e2.y() - e1.y() * e2.x();
    const Scalar scale = e1.norm() * e2.norm();
    if (!(scale > Scalar(0)) || !std::isfinite(static_cast<double>(cross)) ||
        std::abs(cross) <= Scalar(1e-12) * scale) {
      return ConvexOrder::Degenerate;
    }
    (cross > Scalar(0) ? positive : negative) += 1;
  }
  return (positive == 4 || negative == 4) ? ConvexOrder::Valid : ConvexOrder::Degenerate;
}

namespace detail {
template <typename Scalar>
void require_convex(const TeatQuad<Scalar>& c) {
  if (check_convex_order(c) != ConvexOrder::Valid) {
    throw Error(ErrorCode::DegenerateGeometry,
                "teat centers do not form a convex quadrilateral in LF-RF-RR-LR order");
  }
}
}  // namespace detail

/// Lengths of the cyclic edges LF->RF, RF->RR, RR->LR, LR->LF.
template <typename Scalar>
Vector4<Scalar> edge_distances(const TeatQuad<Scalar>& c) {
  detail::require_convex(c);
  Vector4<Scalar> out;
  for (std::size_t i = 0; i < 4; ++i) out(static_cast<Eigen::Index>(i)) = (c[(i + 1) % 4] - c[i]).norm();
  return out;
}

/// Interior angle in degrees at each vertex, from the arccosine of the
/// normalized dot product of the edges to its two cyclic neighbors.
template <typename Scalar>
Vector4<Scalar> interior_angles(const TeatQuad<Scalar>& c) {
  detail::require_convex(c);
  Vector4<Scalar> out;
  for (std::size_t i = 0; i < 4; ++i) {
    const Point2<Scalar> to_prev = c[(i + 3) % 4] - c[i];
    const Point2<Scalar> to_next = c[(i + 1) % 4] - c[i];
    Scalar cosine = to_prev.dot(to_next) / (to_prev.norm() * to_next.norm());
    cosine = std::clamp(cosine, Scalar(-1), Scalar(1));
    out(static_cast<Eigen::Index>(i)) = std::acos(cosine) * Scalar(180) / std::numbers::pi_v<Scalar>;
  }
  return out;
}

/// The 17-dimensional teat descriptor. With `normalize`, distances are divided
/// by sqrt(udder area) and sizes by the udder area; angles and aspect ratios
/// are unaffected. Throws DegenerateGeometry / NonPositiveBox.
GeometricFeatures<double> geometric_features(const UdderAnnotation& ann, bool normalize = false);

}  // namespace udderid
