#include "udderid/geometry.hpp"

#include <gtest/gtest.h>

#include <Eigen/Geometry>

#include "oracles.hpp"
#include "test_support.hpp"

using namespace udderid;
using testing_support::annotation_at;

namespace {

TeatQuad<double> quad(double ax, double ay, double bx, double by, double cx, double cy, double dx, double dy) {
  return {Point2<double>(ax, ay), Point2<double>(bx, by), Point2<double>(cx, cy), Point2<double>(dx, dy)};
}

UdderAnnotation scaled(UdderAnnotation ann, double s) {
  auto scale = [s](Box& b) { b = {b.x * s, b.y * s, b.w * s, b.h * s}; };
  scale(ann.udder_box);
  for (Box& b : ann.teats) scale(b);
  return ann;
}

UdderAnnotation shifted(UdderAnnotation ann, double dx, double dy) {
  ann.udder_box.x += dx;
  ann.udder_box.y += dy;
  for (Box& b : ann.teats) {
    b.x += dx;
    b.y += dy;
  }
  return ann;
}

TEST(TeatCenters, BoxCenters) {
  EXPECT_EQ(box_center({0, 0, 10, 20}), Point2<double>(5, 10));
  EXPECT_EQ(box_center({3, 3, 1, 1}), Point2<double>(3.5, 3.5));

  UdderAnnotation ann;
  ann.teats = {Box{0, 0, 2, 2}, Box{1, 0, 2, 2}, Box{1, 1, 2, 2}, Box{0, 1, 2, 2}};
  const auto c = teat_centers(ann);
  EXPECT_EQ(c[0], Point2<double>(1, 1));
  EXPECT_EQ(c[1], Point2<double>(2, 1));
  EXPECT_EQ(c[2], Point2<double>(2, 2));
  EXPECT_EQ(c[3], Point2<double>(1, 2));
}

TEST(EdgeDistances, SquareAndRectangle) {
  EXPECT_EQ(edge_distances(quad(0, 0, 1, 0, 1, 1, 0, 1)), Vector4<double>(1, 1, 1, 1));
  EXPECT_EQ(edge_distances(quad(0, 0, 2, 0, 2, 1, 0, 1)), Vector4<double>(2, 1, 2, 1));
  const auto moved = quad(7.5, -3, 9.5, -3, 9.5, -2, 7.5, -2);
  EXPECT_EQ(edge_distances(moved), Vector4<double>(2, 1, 2, 1));
}

TEST(InteriorAngles, RightAngles) {
  EXPECT_EQ(interior_angles(quad(0, 0, 1, 0, 1, 1, 0, 1)), Vector4<double>(90, 90, 90, 90));
  EXPECT_EQ(interior_angles(quad(0, 0, 5, 0, 5, 3, 0, 3)), Vector4<double>(90, 90, 90, 90));
}

TEST(InteriorAngles, TrapezoidMatchesOracle) {
  const auto c = quad(0, 0, 4, 0, 3, 2, 1, 2);
  const Vector4<double> a = interior_angles(c);
  for (int i = 0; i < 4; ++i) {
    const auto prev = c[static_cast<std::size_t>((i + 3) % 4)];
    const auto next = c[static_cast<std::size_t>((i + 1) % 4)];
    EXPECT_NEAR(a(i), oracle::angle_at(prev, c[static_cast<std::size_t>(i)], next), 1e-9);
  }
  EXPECT_NEAR(a.sum(), 360.0, 1e-9);
  // atan(2/1) at the base, its supplement at the top.
  EXPECT_NEAR(a(0), 63.43494882292201, 1e-9);
  EXPECT_NEAR(a(2), 116.56505117707799, 1e-9);
}

TEST(CheckConvexOrder, Classification) {
  EXPECT_EQ(check_convex_order(quad(0, 0, 1, 0, 1, 1, 0, 1)), ConvexOrder::Valid);
  EXPECT_EQ(check_convex_order(quad(0, 0, 0, 1, 1, 1, 1, 0)), ConvexOrder::Valid);  // opposite winding
  // LF and RF swapped: the cycle crosses itself.
  EXPECT_EQ(check_convex_order(quad(1, 0, 0, 0, 1, 1, 0, 1)), ConvexOrder::Degenerate);
  EXPECT_EQ(check_convex_order(quad(0, 0, 1, 0, 2, 0, 1, 1)), ConvexOrder::Degenerate);  // collinear
  EXPECT_EQ(check_convex_order(quad(0, 0, 0, 0, 1, 1, 0, 1)), ConvexOrder::Degenerate);  // coincident
  EXPECT_EQ(check_convex_order(quad(0, 0, 4, 0, 1, 1, 0, 4)), ConvexOrder::Degenerate);  // reflex at RR
}

TEST(CheckConvexOrder, DegenerateRaises) {
  EXPECT_THROW(edge_distances(quad(0, 0, 1, 0, 2, 0, 1, 1)), Error);
  EXPECT_THROW(interior_angles(quad(1, 0, 0, 0, 1, 1, 0, 1)), Error);
  const auto ann = annotation_at({Eigen::Vector2d(0, 0), {1, 0}, {2, 0}, {1, 1}});
  try {
    geometric_features(ann);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateGeometry);
  }
}

TEST(GeometricFeatures, SquareLayout) {
  const auto ann = annotation_at({Eigen::Vector2d(20, 20), {80, 20}, {80, 80}, {20, 80}});
  const auto f = geometric_features(ann);
  EXPECT_EQ(f.distances, Vector4<double>::Constant(60));
  EXPECT_EQ(f.angles, Vector4<double>::Constant(90));
  EXPECT_EQ(f.sizes, Vector4<double>::Constant(100));
  EXPECT_EQ(f.aspects, Vector4<double>::Constant(1));
  EXPECT_EQ(f.udder_aspect, 1);

  const auto flat = f.flatten();
  EXPECT_EQ(flat.size(), 17);
  EXPECT_EQ(flat.segment<4>(0), f.distances);
  EXPECT_EQ(flat.segment<4>(4), f.angles);
  EXPECT_EQ(flat.segment<4>(8), f.sizes);
  EXPECT_EQ(flat.segment<4>(12), f.aspects);
  EXPECT_EQ(flat(16), 1);
}

TEST(GeometricFeatures, ScaleByTwo) {
  const auto ann = annotation_at({Eigen::Vector2d(20, 20), {80, 25}, {75, 90}, {15, 70}}, 10, 14, {0, 0, 100, 120});
  const auto a = geometric_features(ann);
  const auto b = geometric_features(scaled(ann, 2));
  EXPECT_TRUE(b.distances.isApprox(2 * a.distances, 1e-12));
  EXPECT_TRUE(b.sizes.isApprox(4 * a.sizes, 1e-12));
  EXPECT_TRUE((b.angles - a.angles).cwiseAbs().maxCoeff() < 1e-9);
  EXPECT_EQ(b.aspects, a.aspects);
  EXPECT_EQ(b.udder_aspect, a.udder_aspect);

  const auto na = geometric_features(ann, true).flatten();
  const auto nb = geometric_features(scaled(ann, 2), true).flatten();
  EXPECT_LT((na - nb).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_EQ(na.segment<4>(4), a.angles);  // normalize leaves angles alone
}

TEST(GeometricFeatures, NonPositiveBox) {
  auto ann = annotation_at({Eigen::Vector2d(20, 20), {80, 20}, {80, 80}, {20, 80}});
  ann.teat(TeatPosition::RR).w = 0;
  try {
    geometric_features(ann);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositiveBox);
  }
}

TEST(GeometricFeatures, PropertiesOverRandomConvexAnnotations) {
  Rng rng(2024);
  for (int i = 0; i < 1000; ++i) {
    const UdderAnnotation ann = testing_support::random_convex_annotation(rng);
    const auto f = geometric_features(ann);
    EXPECT_NEAR(f.angles.sum(), 360.0, 1e-6);
    EXPECT_TRUE((f.angles.array() > 0).all() && (f.angles.array() < 180).all());
    EXPECT_TRUE((f.distances.array() > 0).all());

    const double dx = rng.uniform(-1000, 1000);
    const double dy = rng.uniform(-1000, 1000);
    const auto moved = geometric_features(shifted(ann, dx, dy)).flatten();
    EXPECT_LT((moved - f.flatten()).cwiseAbs().maxCoeff(), 1e-9);

    const double s = rng.uniform(0.25, 4);
    const auto g = geometric_features(scaled(ann, s));
    EXPECT_LT((g.distances - s * f.distances).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((g.sizes - s * s * f.sizes).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((g.angles - f.angles).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((g.aspects - f.aspects).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT(std::abs(g.udder_aspect - f.udder_aspect), 1e-9);

    // Rigid rotation of the centers.
    const double theta = rng.uniform(0, 6.283185307179586);
    const Eigen::Matrix2d rot = Eigen::Rotation2Dd(theta).toRotationMatrix();
    const Point2<double> pivot(rng.uniform(-100, 100), rng.uniform(-100, 100));
    TeatQuad<double> c = teat_centers(ann);
    for (auto& p : c) p = pivot + rot * (p - pivot);
    EXPECT_LT((edge_distances(c) - f.distances).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((interior_angles(c) - f.angles).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(TeatPosition, Names) {
  for (const TeatPosition p : kTeatOrder) EXPECT_EQ(parse_teat_position(to_string(p)), p);
  EXPECT_FALSE(parse_teat_position("XX").has_value());
}

}  // namespace
