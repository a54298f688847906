#include "udderid/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <utility>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "udderid/error.hpp"
#include "udderid/random.hpp"

namespace udderid {

using Json = nlohmann::json;

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::Knn: return "knn";
    case Algorithm::LogReg: return "logreg";
    case Algorithm::Svm: return "svm";
    case Algorithm::Tree: return "tree";
    case Algorithm::Forest: return "forest";
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view text) {
  for (const Algorithm a : kAllAlgorithms) {
    if (text == to_string(a)) return a;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Standardizer

Standardizer Standardizer::fit(const Eigen::MatrixXd& rows) {
  Standardizer s;
  s.mean = rows.colwise().mean().transpose();
  s.scale = Eigen::VectorXd::Ones(rows.cols());
  for (Eigen::Index j = 0; j < rows.cols(); ++j) {
    // Compare extremes rather than the variance: rounding in the mean can leave
    // a spurious tiny variance on constant columns.
    if (rows.col(j).maxCoeff() == rows.col(j).minCoeff()) continue;
    const double var = (rows.col(j).array() - s.mean(j)).square().mean();
    s.scale(j) = std::sqrt(var);
  }
  return s;
}

Standardizer Standardizer::identity(Eigen::Index dims) {
  return {Eigen::VectorXd::Zero(dims), Eigen::VectorXd::Ones(dims)};
}

Eigen::MatrixXd Standardizer::apply_rows(const Eigen::MatrixXd& rows) const {
  return (rows.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

namespace {

// ---------------------------------------------------------------------------
// Training helpers

struct Prepared {
  FeatureLayout layout;
  std::vector<std::string> labels;
  Eigen::MatrixXd x;      // standardized rows
  std::vector<int> y;     // label index per row
  Standardizer standardizer;
};

bool lexicographic_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

Prepared prepare(std::span<const LabeledVector> gallery, bool standardize) {
  if (gallery.empty()) throw Error(ErrorCode::EmptyGallery, "gallery has no samples");
  const FeatureLayout layout = gallery.front().features.layout;
  for (const LabeledVector& s : gallery) {
    if (s.features.layout != layout || s.features.values.size() != dims(layout)) {
      throw Error(ErrorCode::InconsistentLayout, "gallery mixes feature layouts (cow " + s.cow_id + ")");
    }
    if (!s.features.values.allFinite()) {
      throw Error(ErrorCode::NonFiniteFeature, "non-finite feature for cow " + s.cow_id);
    }
  }

  std::vector<std::size_t> order(gallery.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (gallery[a].cow_id != gallery[b].cow_id) return gallery[a].cow_id < gallery[b].cow_id;
    return lexicographic_less(gallery[a].features.values, gallery[b].features.values);
  });

  Prepared p;
  p.layout = layout;
  for (const std::size_t i : order) {
    if (p.labels.empty() || p.labels.back() != gallery[i].cow_id) p.labels.push_back(gallery[i].cow_id);
  }

  const Eigen::Index n = static_cast<Eigen::Index>(gallery.size());
  Eigen::MatrixXd raw(n, dims(layout));
  p.y.resize(gallery.size());
  for (Eigen::Index r = 0; r < n; ++r) {
    const LabeledVector& s = gallery[order[static_cast<std::size_t>(r)]];
    raw.row(r) = s.features.values.transpose();
    p.y[static_cast<std::size_t>(r)] = static_cast<int>(
        std::lower_bound(p.labels.begin(), p.labels.end(), s.cow_id) - p.labels.begin());
  }
  p.standardizer = standardize ? Standardizer::fit(raw) : Standardizer::identity(raw.cols());
  p.x = p.standardizer.apply_rows(raw);
  return p;
}

Eigen::MatrixXd with_bias(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out(x.rows(), x.cols() + 1);
  out << x, Eigen::VectorXd::Ones(x.rows());
  return out;
}

void softmax_rows(Eigen::MatrixXd& z) {
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    const double m = z.row(r).maxCoeff();
    z.row(r) = (z.row(r).array() - m).exp();
    z.row(r) /= z.row(r).sum();
  }
}

model::Linear fit_logreg(const Prepared& p, const Hyperparams& hp) {
  const Eigen::MatrixXd x = with_bias(p.x);
  const Eigen::Index n = x.rows();
  const Eigen::Index classes = static_cast<Eigen::Index>(p.labels.size());

  Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(n, classes);
  for (Eigen::Index r = 0; r < n; ++r) onehot(r, p.y[static_cast<std::size_t>(r)]) = 1.0;

  double rate = hp.logreg_learning_rate;
  if (rate <= 0) {
    const Eigen::MatrixXd gram = x.transpose() * x / static_cast<double>(n);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram, Eigen::EigenvaluesOnly);
    rate = 1.0 / (0.5 * solver.eigenvalues().maxCoeff() + hp.logreg_lambda);
  }

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(classes, x.cols());
  const Eigen::Index bias = x.cols() - 1;
  for (int it = 0; it < hp.logreg_iterations; ++it) {
    Eigen::MatrixXd prob = x * w.transpose();
    softmax_rows(prob);
    Eigen::MatrixXd grad = (prob - onehot).transpose() * x / static_cast<double>(n);
    grad.leftCols(bias) += hp.logreg_lambda * w.leftCols(bias);
    w -= rate * grad;
  }
  return {std::move(w)};
}

// Pegasos, one-vs-rest, with the weight matrix stored as scale * v so the
// per-step shrink is O(1).
model::Linear fit_svm(const Prepared& p, const Hyperparams& hp, std::uint64_t seed) {
  const Eigen::MatrixXd x = with_bias(p.x);
  const Eigen::Index n = x.rows();
  const Eigen::Index classes = static_cast<Eigen::Index>(p.labels.size());
  const double lambda = hp.svm_lambda;

  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(classes, x.cols());
  double scale = 1.0;
  Rng rng(seed);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  long long t = 0;
  for (int epoch = 0; epoch < hp.svm_epochs; ++epoch) {
    rng.shuffle(std::span(order));
    for (const Eigen::Index i : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const auto xi = x.row(i);
      const Eigen::VectorXd margins = scale * (v * xi.transpose());

      const double shrink = 1.0 - eta * lambda;
      if (shrink <= 0.0) {
        v.setZero();
        scale = 1.0;
      } else {
        scale *= shrink;
      }
      for (Eigen::Index c = 0; c < classes; ++c) {
        const double yc = (c == p.y[static_cast<std::size_t>(i)]) ? 1.0 : -1.0;
        if (yc * margins(c) < 1.0) v.row(c) += (eta * yc / scale) * xi;
      }
      if (scale < 1e-9) {
        v *= scale;
        scale = 1.0;
      }
    }
  }
  return {scale * v};
}

// CART with Gini impurity.
class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& x, const std::vector<int>& y, int classes, int max_features, Rng* rng)
      : x_(x), y_(y), classes_(classes), max_features_(max_features), rng_(rng) {}

  model::Tree build(std::vector<int> rows) {
    model::Tree tree;
    grow(tree, std::move(rows));
    return tree;
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0;
    double impurity = 0;
  };

  int grow(model::Tree& tree, std::vector<int> rows) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();

    std::vector<int> counts(static_cast<std::size_t>(classes_), 0);
    for (const int r : rows) ++counts[static_cast<std::size_t>(y_[static_cast<std::size_t>(r)])];
    const bool pure = std::count_if(counts.begin(), counts.end(), [](int c) { return c > 0; }) <= 1;

    std::optional<Split> split;
    if (!pure) split = best_split(rows);
    if (!split) {
      tree.nodes[static_cast<std::size_t>(id)].counts = std::move(counts);
      return id;
    }

    std::vector<int> left;
    std::vector<int> right;
    for (const int r : rows) (x_(r, split->feature) <= split->threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    const int l = grow(tree, std::move(left));
    const int rr = grow(tree, std::move(right));
    model::TreeNode& node = tree.nodes[static_cast<std::size_t>(id)];
    node.feature = split->feature;
    node.threshold = split->threshold;
    node.left = l;
    node.right = rr;
    return id;
  }

  // Best split over `features` (ascending); strict improvement keeps the
  // lowest feature index, then the lowest threshold, on ties.
  std::optional<Split> best_over(const std::vector<int>& rows, const std::vector<int>& features) const {
    std::optional<Split> best;
    const double n = static_cast<double>(rows.size());
    std::vector<int> sorted = rows;
    std::vector<int> left(static_cast<std::size_t>(classes_));
    std::vector<int> right(static_cast<std::size_t>(classes_));
    for (const int f : features) {
      std::sort(sorted.begin(), sorted.end(), [&](int a, int b) {
        const double va = x_(a, f);
        const double vb = x_(b, f);
        return va < vb || (va == vb && a < b);
      });
      std::fill(left.begin(), left.end(), 0);
      std::fill(right.begin(), right.end(), 0);
      for (const int r : sorted) ++right[static_cast<std::size_t>(y_[static_cast<std::size_t>(r)])];
      long long left_sq = 0;
      long long right_sq = 0;
      for (const int c : right) right_sq += static_cast<long long>(c) * c;

      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        const auto cls = static_cast<std::size_t>(y_[static_cast<std::size_t>(sorted[i])]);
        left_sq += 2LL * left[cls] + 1;
        ++left[cls];
        right_sq -= 2LL * right[cls] - 1;
        --right[cls];

        const double a = x_(sorted[i], f);
        const double b = x_(sorted[i + 1], f);
        if (!(a < b)) continue;
        const double nl = static_cast<double>(i + 1);
        const double nr = n - nl;
        const double impurity = ((nl - static_cast<double>(left_sq) / nl) +
                                 (nr - static_cast<double>(right_sq) / nr)) / n;
        if (!best || impurity < best->impurity) {
          double threshold = a + (b - a) / 2;
          if (!(threshold < b)) threshold = a;  // adjacent doubles
          best = Split{f, threshold, impurity};
        }
      }
    }
    return best;
  }

  std::optional<Split> best_split(const std::vector<int>& rows) {
    const int d = static_cast<int>(x_.cols());
    if (max_features_ <= 0 || max_features_ >= d || rng_ == nullptr) {
      std::vector<int> all(static_cast<std::size_t>(d));
      std::iota(all.begin(), all.end(), 0);
      return best_over(rows, all);
    }
    std::vector<int> candidates(static_cast<std::size_t>(d));
    std::iota(candidates.begin(), candidates.end(), 0);
    rng_->shuffle(std::span(candidates));
    std::vector<int> chosen(candidates.begin(), candidates.begin() + max_features_);
    std::sort(chosen.begin(), chosen.end());
    if (auto split = best_over(rows, chosen)) return split;
    // None of the drawn features separates the node: keep drawing.
    for (std::size_t i = static_cast<std::size_t>(max_features_); i < candidates.size(); ++i) {
      if (auto split = best_over(rows, {candidates[i]})) return split;
    }
    return std::nullopt;
  }

  const Eigen::MatrixXd& x_;
  const std::vector<int>& y_;
  int classes_;
  int max_features_;
  Rng* rng_;
};

const model::TreeNode& leaf_for(const model::Tree& tree, const Eigen::VectorXd& x) {
  const model::TreeNode* node = &tree.nodes.front();
  while (node->feature >= 0) {
    node = &tree.nodes[static_cast<std::size_t>(x(node->feature) <= node->threshold ? node->left : node->right)];
  }
  return *node;
}

int leaf_majority(const model::TreeNode& leaf) {
  // max_element returns the first maximum, i.e. the lexicographically smallest id.
  return static_cast<int>(std::max_element(leaf.counts.begin(), leaf.counts.end()) - leaf.counts.begin());
}

std::vector<ScoredLabel> order_scores(const std::vector<std::string>& labels, const Eigen::VectorXd& score,
                                      const Eigen::VectorXd* secondary = nullptr) {
  std::vector<int> idx(labels.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (score(a) != score(b)) return score(a) > score(b);
    if (secondary && (*secondary)(a) != (*secondary)(b)) return (*secondary)(a) > (*secondary)(b);
    return labels[static_cast<std::size_t>(a)] < labels[static_cast<std::size_t>(b)];
  });
  std::vector<ScoredLabel> out;
  out.reserve(idx.size());
  for (const int i : idx) out.push_back({labels[static_cast<std::size_t>(i)], score(i)});
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// TrainedModel

TrainedModel::TrainedModel(Algorithm algorithm, FeatureLayout layout, std::vector<std::string> labels,
                           Standardizer standardizer, Hyperparams hyperparams, Params params)
    : algorithm_(algorithm),
      layout_(layout),
      labels_(std::move(labels)),
      standardizer_(std::move(standardizer)),
      hyperparams_(hyperparams),
      params_(std::move(params)) {}

std::vector<ScoredLabel> TrainedModel::scores(const FeatureVector& probe) const {
  if (probe.layout != layout_ || probe.values.size() != dims(layout_)) {
    throw Error(ErrorCode::LayoutMismatch, "probe is " + std::string(to_string(probe.layout)) + ", model is " +
                                               std::string(to_string(layout_)));
  }
  const Eigen::VectorXd x = standardizer_.apply(probe.values);
  const Eigen::Index classes = static_cast<Eigen::Index>(labels_.size());

  switch (algorithm_) {
    case Algorithm::Knn: {
      const auto& m = std::get<model::Knn>(params_);
      const Eigen::VectorXd dist = (m.gallery.rowwise() - x.transpose()).rowwise().norm();
      Eigen::VectorXd nearest = Eigen::VectorXd::Constant(classes, -std::numeric_limits<double>::infinity());
      for (Eigen::Index r = 0; r < dist.size(); ++r) {
        double& s = nearest(m.gallery_labels[static_cast<std::size_t>(r)]);
        s = std::max(s, -dist(r));
      }
      if (m.k <= 1) return order_scores(labels_, nearest);

      std::vector<Eigen::Index> idx(static_cast<std::size_t>(dist.size()));
      std::iota(idx.begin(), idx.end(), 0);
      const auto k = std::min<std::size_t>(static_cast<std::size_t>(m.k), idx.size());
      std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                        [&](Eigen::Index a, Eigen::Index b) { return dist(a) < dist(b) || (dist(a) == dist(b) && a < b); });
      Eigen::VectorXd votes = Eigen::VectorXd::Zero(classes);
      for (std::size_t i = 0; i < k; ++i) votes(m.gallery_labels[static_cast<std::size_t>(idx[i])]) += 1.0;
      auto ranked = order_scores(labels_, votes, &nearest);
      // Report the distance score; the order already reflects the votes.
      for (ScoredLabel& s : ranked) {
        s.score = nearest(std::lower_bound(labels_.begin(), labels_.end(), s.cow_id) - labels_.begin());
      }
      return ranked;
    }
    case Algorithm::LogReg: {
      const auto& m = std::get<model::Linear>(params_);
      Eigen::MatrixXd z = (m.weights.leftCols(x.size()) * x + m.weights.col(x.size())).transpose();
      softmax_rows(z);
      return order_scores(labels_, z.row(0).transpose());
    }
    case Algorithm::Svm: {
      const auto& m = std::get<model::Linear>(params_);
      const Eigen::VectorXd margins = m.weights.leftCols(x.size()) * x + m.weights.col(x.size());
      return order_scores(labels_, margins);
    }
    case Algorithm::Tree: {
      const model::TreeNode& leaf = leaf_for(std::get<model::Tree>(params_), x);
      Eigen::VectorXd freq(classes);
      const double total = std::accumulate(leaf.counts.begin(), leaf.counts.end(), 0.0);
      for (Eigen::Index c = 0; c < classes; ++c) freq(c) = leaf.counts[static_cast<std::size_t>(c)] / total;
      return order_scores(labels_, freq);
    }
    case Algorithm::Forest: {
      Eigen::VectorXd votes = Eigen::VectorXd::Zero(classes);
      for (const model::Tree& tree : std::get<model::Forest>(params_).trees) {
        votes(leaf_majority(leaf_for(tree, x))) += 1.0;
      }
      return order_scores(labels_, votes);
    }
  }
  return {};
}

std::vector<std::string> TrainedModel::rank(const FeatureVector& probe) const {
  std::vector<std::string> out;
  for (ScoredLabel& s : scores(probe)) out.push_back(std::move(s.cow_id));
  return out;
}

std::string TrainedModel::predict(const FeatureVector& probe) const { return scores(probe).front().cow_id; }

// ---------------------------------------------------------------------------
// fit

TrainedModel fit(Algorithm algorithm, std::span<const LabeledVector> gallery, const Hyperparams& hp,
                 std::uint64_t seed) {
  Prepared p = prepare(gallery, hp.standardize);
  const int classes = static_cast<int>(p.labels.size());

  TrainedModel::Params params;
  switch (algorithm) {
    case Algorithm::Knn:
      params = model::Knn{std::max(1, hp.knn_k), p.x, p.y};
      break;
    case Algorithm::LogReg:
      params = fit_logreg(p, hp);
      break;
    case Algorithm::Svm:
      params = fit_svm(p, hp, derive_seed(seed, 0x5356u));
      break;
    case Algorithm::Tree: {
      std::vector<int> rows(static_cast<std::size_t>(p.x.rows()));
      std::iota(rows.begin(), rows.end(), 0);
      params = TreeBuilder(p.x, p.y, classes, 0, nullptr).build(std::move(rows));
      break;
    }
    case Algorithm::Forest: {
      const int d = static_cast<int>(p.x.cols());
      const int max_features = hp.forest_max_features > 0
                                   ? hp.forest_max_features
                                   : std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(d)))));
      Rng rng(derive_seed(seed, 0x5246u));
      model::Forest forest;
      const auto n = static_cast<std::uint64_t>(p.x.rows());
      for (int t = 0; t < hp.forest_trees; ++t) {
        std::vector<int> rows(n);
        for (int& r : rows) r = static_cast<int>(rng.index(n));
        forest.trees.push_back(TreeBuilder(p.x, p.y, classes, max_features, &rng).build(std::move(rows)));
      }
      params = std::move(forest);
      break;
    }
  }
  return TrainedModel(algorithm, p.layout, std::move(p.labels), std::move(p.standardizer), hp,
                      std::move(params));
}

// ---------------------------------------------------------------------------
// JSON

namespace {

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& j, Eigen::Index cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), cols);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const auto row = j.at(static_cast<std::size_t>(r)).get<std::vector<double>>();
    if (static_cast<Eigen::Index>(row.size()) != cols) throw Error(ErrorCode::ParseError, "matrix row width");
    m.row(r) = Eigen::Map<const Eigen::RowVectorXd>(row.data(), cols);
  }
  return m;
}

Json vector_to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.begin(), v.end()); }

Eigen::VectorXd vector_from_json(const Json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Json tree_to_json(const model::Tree& tree) {
  Json nodes = Json::array();
  for (const model::TreeNode& n : tree.nodes) {
    if (n.feature < 0) {
      nodes.push_back({{"counts", n.counts}});
    } else {
      nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right}});
    }
  }
  return nodes;
}

model::Tree tree_from_json(const Json& j, std::size_t classes) {
  model::Tree tree;
  for (const Json& n : j) {
    model::TreeNode node;
    if (n.contains("counts")) {
      node.counts = n.at("counts").get<std::vector<int>>();
      if (node.counts.size() != classes) throw Error(ErrorCode::ParseError, "leaf count width");
    } else {
      node.feature = n.at("feature").get<int>();
      node.threshold = n.at("threshold").get<double>();
      node.left = n.at("left").get<int>();
      node.right = n.at("right").get<int>();
    }
    tree.nodes.push_back(std::move(node));
  }
  const auto count = static_cast<int>(tree.nodes.size());
  if (count == 0) throw Error(ErrorCode::ParseError, "empty tree");
  for (const model::TreeNode& n : tree.nodes) {
    if (n.feature >= 0 && (n.left <= 0 || n.left >= count || n.right <= 0 || n.right >= count)) {
      throw Error(ErrorCode::ParseError, "tree child index out of range");
    }
  }
  return tree;
}

}  // namespace

std::string to_json(const TrainedModel& m) {
  const Hyperparams& hp = m.hyperparams();
  Json j;
  j["format"] = "udderid-model";
  j["version"] = 1;
  j["algorithm"] = std::string(to_string(m.algorithm()));
  j["layout"] = std::string(to_string(m.layout()));
  j["labels"] = m.labels();
  j["hyperparams"] = {{"standardize", hp.standardize},
                      {"knn_k", hp.knn_k},
                      {"logreg_lambda", hp.logreg_lambda},
                      {"logreg_iterations", hp.logreg_iterations},
                      {"logreg_learning_rate", hp.logreg_learning_rate},
                      {"svm_lambda", hp.svm_lambda},
                      {"svm_epochs", hp.svm_epochs},
                      {"forest_trees", hp.forest_trees},
                      {"forest_max_features", hp.forest_max_features}};
  j["standardizer"] = {{"mean", vector_to_json(m.standardizer().mean)},
                       {"scale", vector_to_json(m.standardizer().scale)}};

  Json params;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, model::Knn>) {
          params = {{"k", p.k}, {"gallery", matrix_to_json(p.gallery)}, {"gallery_labels", p.gallery_labels}};
        } else if constexpr (std::is_same_v<T, model::Linear>) {
          params = {{"weights", matrix_to_json(p.weights)}};
        } else if constexpr (std::is_same_v<T, model::Tree>) {
          params = {{"nodes", tree_to_json(p)}};
        } else {
          Json trees = Json::array();
          for (const model::Tree& t : p.trees) trees.push_back(tree_to_json(t));
          params = {{"trees", std::move(trees)}};
        }
      },
      m.params());
  j["params"] = std::move(params);
  return j.dump();
}

TrainedModel model_from_json(std::string_view text) {
  try {
    const Json j = Json::parse(text);
    if (j.at("format") != "udderid-model") throw Error(ErrorCode::ParseError, "not a model document");
    if (j.at("version") != 1) throw Error(ErrorCode::ParseError, "unsupported model version");

    const auto algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    const auto layout = parse_layout(j.at("layout").get<std::string>());
    if (!algorithm || !layout) throw Error(ErrorCode::ParseError, "unknown algorithm or layout");
    auto labels = j.at("labels").get<std::vector<std::string>>();
    if (labels.empty() || !std::is_sorted(labels.begin(), labels.end()) ||
        std::adjacent_find(labels.begin(), labels.end()) != labels.end()) {
      throw Error(ErrorCode::ParseError, "labels must be sorted and unique");
    }

    Hyperparams hp;
    const Json& h = j.at("hyperparams");
    hp.standardize = h.at("standardize").get<bool>();
    hp.knn_k = h.at("knn_k").get<int>();
    hp.logreg_lambda = h.at("logreg_lambda").get<double>();
    hp.logreg_iterations = h.at("logreg_iterations").get<int>();
    hp.logreg_learning_rate = h.at("logreg_learning_rate").get<double>();
    hp.svm_lambda = h.at("svm_lambda").get<double>();
    hp.svm_epochs = h.at("svm_epochs").get<int>();
    hp.forest_trees = h.at("forest_trees").get<int>();
    hp.forest_max_features = h.at("forest_max_features").get<int>();

    const Eigen::Index d = dims(*layout);
    Standardizer st{vector_from_json(j.at("standardizer").at("mean")),
                    vector_from_json(j.at("standardizer").at("scale"))};
    if (st.mean.size() != d || st.scale.size() != d) throw Error(ErrorCode::ParseError, "standardizer width");

    const Json& p = j.at("params");
    const auto classes = static_cast<Eigen::Index>(labels.size());
    TrainedModel::Params params;
    switch (*algorithm) {
      case Algorithm::Knn: {
        model::Knn knn{p.at("k").get<int>(), matrix_from_json(p.at("gallery"), d),
                       p.at("gallery_labels").get<std::vector<int>>()};
        if (static_cast<Eigen::Index>(knn.gallery_labels.size()) != knn.gallery.rows()) {
          throw Error(ErrorCode::ParseError, "gallery label count");
        }
        for (const int l : knn.gallery_labels) {
          if (l < 0 || l >= classes) throw Error(ErrorCode::ParseError, "gallery label out of range");
        }
        params = std::move(knn);
        break;
      }
      case Algorithm::LogReg:
      case Algorithm::Svm: {
        model::Linear lin{matrix_from_json(p.at("weights"), d + 1)};
        if (lin.weights.rows() != classes) throw Error(ErrorCode::ParseError, "weight rows");
        params = std::move(lin);
        break;
      }
      case Algorithm::Tree:
        params = tree_from_json(p.at("nodes"), labels.size());
        break;
      case Algorithm::Forest: {
        model::Forest forest;
        for (const Json& t : p.at("trees")) forest.trees.push_back(tree_from_json(t, labels.size()));
        if (forest.trees.empty()) throw Error(ErrorCode::ParseError, "forest without trees");
        params = std::move(forest);
        break;
      }
    }
    return TrainedModel(*algorithm, *layout, std::move(labels), std::move(st), hp, std::move(params));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

}  // namespace udderid
