#include "udderid/features.hpp"

#include <string>

#include "udderid/error.hpp"

namespace udderid {

std::string_view to_string(FeatureLayout layout) {
  switch (layout) {
    case FeatureLayout::Geometry17: return "geometry-17";
    case FeatureLayout::Texture72: return "texture-72";
    case FeatureLayout::Combined89: return "combined-89";
  }
  return "unknown";
}

std::optional<FeatureLayout> parse_layout(std::string_view text) {
  if (text == "geometry-17" || text == "geometry") return FeatureLayout::Geometry17;
  if (text == "texture-72" || text == "texture") return FeatureLayout::Texture72;
  if (text == "combined-89" || text == "combined") return FeatureLayout::Combined89;
  return std::nullopt;
}

FeatureVector make_feature_vector(FeatureLayout layout, Eigen::VectorXd values) {
  if (values.size() != dims(layout)) {
    throw Error(ErrorCode::InconsistentLayout, std::string(to_string(layout)) + " expects " +
                                                   std::to_string(dims(layout)) + " values, got " +
                                                   std::to_string(values.size()));
  }
  if (!values.allFinite()) throw Error(ErrorCode::NonFiniteFeature, "feature vector has NaN or infinity");
  return {layout, std::move(values)};
}

}  // namespace udderid
