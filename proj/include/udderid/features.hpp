#pragma once

#include <optional>
#include <string_view>

#include <Eigen/Core>

namespace udderid {

enum class FeatureLayout { Geometry17, Texture72, Combined89 };

constexpr int dims(FeatureLayout layout) {
  switch (layout) {
    case FeatureLayout::Geometry17: return 17;
    case FeatureLayout::Texture72: return 72;
    case FeatureLayout::Combined89: return 89;
  }
  return 0;
}

/// "geometry-17", "texture-72", "combined-89".
std::string_view to_string(FeatureLayout layout);

/// Accepts the canonical names and the short forms "geometry", "texture",
/// "combined".
std::optional<FeatureLayout> parse_layout(std::string_view text);

struct FeatureVector {
  FeatureLayout layout = FeatureLayout::Geometry17;
  Eigen::VectorXd values;
};

/// Checks length against the layout (InconsistentLayout) and finiteness
/// (NonFiniteFeature).
FeatureVector make_feature_vector(FeatureLayout layout, Eigen::VectorXd values);

}  // namespace udderid
