#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "udderid/geometry.hpp"
#include "udderid/image.hpp"

namespace udderid {

/// Stable per-cow geometry from which sessions are sampled.
struct CowTemplate {
  std::string cow_id;
  TeatQuad<double> centers;                    // LF, RF, RR, LR
  std::array<Eigen::Vector2d, 4> teat_dims{};  // (w, h) per teat
  Box udder_box;
  std::uint64_t texture_seed = 0;
};

/// Priors for generate_herd. All values are in pixels of a square canvas;
/// the quadrilateral is centered on the canvas.
struct GeometryPrior {
  double canvas = 400;
  double spacing_min = 80;   // every quadrilateral edge length lies in
  double spacing_max = 200;  // [spacing_min, spacing_max]
  double stagger = 15;       // per-coordinate offset from the trapezoid layout
  double teat_w_min = 20;
  double teat_w_max = 40;
  double teat_h_min = 30;
  double teat_h_max = 60;
  double udder_margin_min = 10;
  double udder_margin_max = 30;
};

/// Session-to-session variation. Collection-2 sessions additionally carry a
/// persistent per-cow deformation of size (drift_factor - 1) times the drift
/// sigmas, shared by both days of that collection.
struct NoiseModel {
  double center_sigma = 1.0;   // pixels
  double box_sigma = 0.02;     // relative
  double scale_sigma = 0.02;   // relative, whole annotation
  double drift_factor = 1.0;   // >= 1
  double drift_center_sigma = 10.0;
  double drift_box_sigma = 0.10;
};

struct Session {
  int collection = 1;
  int day = 1;
};

/// `count` templates; template i depends only on (master_seed, i), so a larger
/// herd extends a smaller one. Every template passes check_convex_order.
std::vector<CowTemplate> generate_herd(int count, std::uint64_t master_seed, const GeometryPrior& prior = {});

/// Zero-deviation annotation of a template.
UdderAnnotation template_annotation(const CowTemplate& cow);

/// One noisy observation of `cow`. Deterministic in all arguments; the result
/// always passes check_convex_order.
UdderAnnotation sample_session(const CowTemplate& cow, const NoiseModel& noise, Session session, std::uint64_t seed);

UdderAnnotation translated(UdderAnnotation ann, double dx, double dy);

/// Procedural NIR-like frame: seeded background texture, dark curvilinear
/// vein strokes anchored to the udder box, and bright teat blobs. Throws
/// BoxOutsideCanvas if any box leaves the canvas.
GrayImage render_synthetic_image(const UdderAnnotation& ann, std::uint64_t texture_seed, ImageSize size);

}  // namespace udderid
