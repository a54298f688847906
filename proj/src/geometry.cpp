#include "udderid/geometry.hpp"

namespace udderid {

std::string_view to_string(TeatPosition position) {
  switch (position) {
    case TeatPosition::LF: return "LF";
    case TeatPosition::RF: return "RF";
    case TeatPosition::RR: return "RR";
    case TeatPosition::LR: return "LR";
  }
  return "??";
}

std::optional<TeatPosition> parse_teat_position(std::string_view text) {
  for (const TeatPosition p : kTeatOrder) {
    if (text == to_string(p)) return p;
  }
  return std::nullopt;
}

namespace {
bool positive_box(const Box& b) {
  return std::isfinite(b.x) && std::isfinite(b.y) && std::isfinite(b.w) && std::isfinite(b.h) && b.w > 0 &&
         b.h > 0;
}
}  // namespace

void validate(const UdderAnnotation& ann) {
  if (!positive_box(ann.udder_box)) throw Error(ErrorCode::NonPositiveBox, "udder box");
  for (const TeatPosition p : kTeatOrder) {
    if (!positive_box(ann.teat(p))) {
      throw Error(ErrorCode::NonPositiveBox, "teat " + std::string(to_string(p)));
    }
  }
}

GeometricFeatures<double> geometric_features(const UdderAnnotation& ann, bool normalize) {
  validate(ann);
  const TeatQuad<double> centers = teat_centers(ann);

  GeometricFeatures<double> f;
  f.distances = edge_distances(centers);
  f.angles = interior_angles(centers);
  for (std::size_t i = 0; i < 4; ++i) {
    const Box& b = ann.teats[i];
    f.sizes(static_cast<Eigen::Index>(i)) = b.w * b.h;
    f.aspects(static_cast<Eigen::Index>(i)) = b.w / b.h;
  }
  f.udder_aspect = ann.udder_box.w / ann.udder_box.h;

  if (normalize) {
    const double area = ann.udder_box.w * ann.udder_box.h;
    f.distances /= std::sqrt(area);
    f.sizes /= area;
  }
  return f;
}

}  // namespace udderid
