#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "udderid/features.hpp"

namespace udderid {

enum class Algorithm { Knn, LogReg, Svm, Tree, Forest };

inline constexpr Algorithm kAllAlgorithms[] = {Algorithm::Knn, Algorithm::LogReg, Algorithm::Svm,
                                               Algorithm::Tree, Algorithm::Forest};

std::string_view to_string(Algorithm algorithm);
std::optional<Algorithm> parse_algorithm(std::string_view text);

/// Training constants. Every field has a fixed default; zero means "derive"
/// where noted.
struct Hyperparams {
  bool standardize = true;

  int knn_k = 1;

  double logreg_lambda = 1e-3;
  int logreg_iterations = 2000;
  double logreg_learning_rate = 0.0;  // 0: 1 / (L/2 + lambda), L = top eigenvalue of X'X/n

  double svm_lambda = 1e-3;
  int svm_epochs = 2000;

  int forest_trees = 100;
  int forest_max_features = 0;  // 0: floor(sqrt(d)), at least 1
};

struct LabeledVector {
  FeatureVector features;
  std::string cow_id;
};

/// Per-dimension affine map fitted on the gallery. Constant dimensions are
/// centered but keep scale 1.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& rows);
  static Standardizer identity(Eigen::Index dims);

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return (x - mean).cwiseQuotient(scale); }
  Eigen::MatrixXd apply_rows(const Eigen::MatrixXd& rows) const;
};

struct ScoredLabel {
  std::string cow_id;
  double score = 0;
};

namespace model {

struct Knn {
  int k = 1;
  Eigen::MatrixXd gallery;             // standardized, one row per sample
  std::vector<int> gallery_labels;     // index into the label set
};

/// Shared by logistic regression and the linear SVM: one row per label, the
/// last column is the bias.
struct Linear {
  Eigen::MatrixXd weights;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0;
  int left = -1;     // x[feature] <= threshold
  int right = -1;
  std::vector<int> counts;  // leaf class counts, indexed by label
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct Forest {
  std::vector<Tree> trees;
};

}  // namespace model

/// A classifier fitted on an enrolled gallery. Immutable; rank/predict are
/// safe to call concurrently.
class TrainedModel {
 public:
  using Params = std::variant<model::Knn, model::Linear, model::Tree, model::Forest>;

  TrainedModel(Algorithm algorithm, FeatureLayout layout, std::vector<std::string> labels,
               Standardizer standardizer, Hyperparams hyperparams, Params params);

  Algorithm algorithm() const { return algorithm_; }
  FeatureLayout layout() const { return layout_; }
  /// Sorted, unique enrolled cow ids.
  const std::vector<std::string>& labels() const { return labels_; }
  const Standardizer& standardizer() const { return standardizer_; }
  const Hyperparams& hyperparams() const { return hyperparams_; }
  const Params& params() const { return params_; }

  /// Every enrolled label with its algorithm-specific score, best first.
  /// Ties are broken by lexicographic cow id. Throws LayoutMismatch.
  std::vector<ScoredLabel> scores(const FeatureVector& probe) const;

  std::vector<std::string> rank(const FeatureVector& probe) const;
  std::string predict(const FeatureVector& probe) const;

 private:
  Algorithm algorithm_;
  FeatureLayout layout_;
  std::vector<std::string> labels_;
  Standardizer standardizer_;
  Hyperparams hyperparams_;
  Params params_;
};

/// Fits `algorithm` on the gallery. The gallery is first put in canonical
/// order (cow id, then feature values) so results do not depend on input
/// order. Throws EmptyGallery, InconsistentLayout, NonFiniteFeature.
TrainedModel fit(Algorithm algorithm, std::span<const LabeledVector> gallery, const Hyperparams& hyperparams,
                 std::uint64_t seed);

/// Versioned JSON document (`"format": "udderid-model", "version": 1`).
std::string to_json(const TrainedModel& model);
TrainedModel model_from_json(std::string_view text);

}  // namespace udderid
