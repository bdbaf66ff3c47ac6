/*
 * Copyright 2026 The rehabeval Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "rehab/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "rehab/csv.hpp"
#include "rehab/error.hpp"

namespace rehab {

using nlohmann::json;

FeatureMatrix FeatureMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  FeatureMatrix m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) {
      throw Error(ErrorCode::kFeatureLengthMismatch, "ragged feature rows");
    }
    std::copy(rows[r].begin(), rows[r].end(), m.data_.begin() + static_cast<std::ptrdiff_t>(r * cols));
  }
  return m;
}

BaselineModel fit_baseline(std::span<const double> labels) {
  if (labels.empty()) throw Error(ErrorCode::kEmptyTrainingSet, "baseline needs at least one label");
  double sum = 0.0;
  for (double y : labels) {
    if (!(y >= 0.0 && y <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "labels must lie in [0, 1]");
    }
    sum += y;
  }
  return BaselineModel{sum / static_cast<double>(labels.size()), labels.size(), {}};
}

double predict_baseline(const BaselineModel& model, std::span<const double>) {
  return model.mean_score;
}

void GbdtParams::validate() const {
  if (n_trees < 0) throw Error(ErrorCode::kInvalidArgument, "n_trees must be >= 0");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "learning_rate must lie in (0, 1]");
  }
  if (max_depth < 1) throw Error(ErrorCode::kInvalidArgument, "max_depth must be >= 1");
  if (!(lambda_l2 >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "lambda_l2 must be >= 0");
  if (!(gamma_min_gain >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "gamma_min_gain must be >= 0");
  if (!(min_child_weight >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "min_child_weight must be >= 0");
  }
}

double RegressionTree::predict(std::span<const double> x) const {
  if (nodes.empty()) return 0.0;
  int i = 0;
  while (!nodes[i].is_leaf()) {
    const TreeNode& n = nodes[i];
    i = x[n.feature_index] < n.threshold ? n.left : n.right;
  }
  return nodes[i].weight;
}

int RegressionTree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<std::pair<int, int>> stack = {{0, 0}};
  int best = 0;
  while (!stack.empty()) {
    const auto [i, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (!nodes[i].is_leaf()) {
      stack.emplace_back(nodes[i].left, d + 1);
      stack.emplace_back(nodes[i].right, d + 1);
    }
  }
  return best;
}

int RegressionTree::max_feature_index() const {
  int best = -1;
  for (const auto& n : nodes) {
    if (!n.is_leaf()) best = std::max(best, n.feature_index);
  }
  return best;
}

double GbdtModel::predict_raw(std::span<const double> x) const {
  double y = base_score;
  for (const auto& t : trees) y += params.learning_rate * t.predict(x);
  return y;
}

std::size_t GbdtModel::required_features() const {
  int best = -1;
  for (const auto& t : trees) best = std::max(best, t.max_feature_index());
  return static_cast<std::size_t>(best + 1);
}

double split_gain(double g_left, double h_left, double g_right, double h_right,
                  const GbdtParams& params) {
  const double lambda = params.lambda_l2;
  const double g = g_left + g_right;
  const double h = h_left + h_right;
  return 0.5 * (g_left * g_left / (h_left + lambda) + g_right * g_right / (h_right + lambda) -
                g * g / (h + lambda)) -
         params.gamma_min_gain;
}

namespace {

// Row orders per feature, ascending by (value, row index).
std::vector<std::vector<std::size_t>> presort_features(const FeatureMatrix& x,
                                                       std::span<const std::size_t> rows) {
  std::vector<std::vector<std::size_t>> orders(x.cols());
  for (std::size_t f = 0; f < x.cols(); ++f) {
    auto& order = orders[f];
    order.assign(rows.begin(), rows.end());
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double va = x(a, f), vb = x(b, f);
      return va != vb ? va < vb : a < b;
    });
  }
  return orders;
}

// Scans each feature's presorted order restricted to rows with
// in_node[row] set. Shared by the public search and tree growth.
std::optional<SplitCandidate> best_split_presorted(
    const FeatureMatrix& x, std::span<const double> grad, std::span<const double> hess,
    const std::vector<std::vector<std::size_t>>& orders, const std::vector<char>& in_node,
    std::size_t n_members, const GbdtParams& params) {
  if (n_members < 2) return std::nullopt;
  double g_total = 0.0, h_total = 0.0;
  for (std::size_t r = 0; r < in_node.size(); ++r) {
    if (in_node[r]) {
      g_total += grad[r];
      h_total += hess[r];
    }
  }
  std::optional<SplitCandidate> best;
  for (std::size_t f = 0; f < orders.size(); ++f) {
    double g_left = 0.0, h_left = 0.0;
    std::size_t prev = 0;
    bool have_prev = false;
    for (std::size_t r : orders[f]) {
      if (!in_node[r]) continue;
      if (have_prev) {
        const double lo = x(prev, f);
        const double hi = x(r, f);
        const double h_right = h_total - h_left;
        if (lo < hi && h_left >= params.min_child_weight && h_right >= params.min_child_weight) {
          const double gain = split_gain(g_left, h_left, g_total - g_left, h_right, params);
          if (gain > 0.0 && (!best || gain > best->gain)) {
            double threshold = lo + (hi - lo) / 2.0;
            // Adjacent doubles: the midpoint may round onto `lo`.
            if (!(threshold > lo)) threshold = hi;
            best = SplitCandidate{f, threshold, gain};
          }
        }
      }
      g_left += grad[r];
      h_left += hess[r];
      prev = r;
      have_prev = true;
    }
  }
  return best;
}

}  // namespace

std::optional<SplitCandidate> find_best_split(const FeatureMatrix& x, std::span<const double> grad,
                                              std::span<const double> hess,
                                              std::span<const std::size_t> members,
                                              const GbdtParams& params) {
  std::vector<char> in_node(x.rows(), 0);
  std::size_t n = 0;
  for (std::size_t r : members) {
    if (!in_node[r]) ++n;
    in_node[r] = 1;
  }
  return best_split_presorted(x, grad, hess, presort_features(x, members), in_node, n, params);
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& x, std::span<const double> grad, std::span<const double> hess,
              const GbdtParams& params)
      : x_(x), grad_(grad), hess_(hess), params_(params) {
    std::vector<std::size_t> all(x.rows());
    std::iota(all.begin(), all.end(), 0);
    orders_ = presort_features(x, all);
  }

  RegressionTree build() {
    tree_ = RegressionTree{};
    std::vector<std::size_t> all(x_.rows());
    std::iota(all.begin(), all.end(), 0);
    grow(all, 0);
    return std::move(tree_);
  }

 private:
  // members are ascending row indices.
  int grow(const std::vector<std::size_t>& members, int depth) {
    const int index = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    std::optional<SplitCandidate> split;
    if (depth < params_.max_depth) {
      std::vector<char> in_node(x_.rows(), 0);
      for (std::size_t r : members) in_node[r] = 1;
      split = best_split_presorted(x_, grad_, hess_, orders_, in_node, members.size(), params_);
    }
    if (!split) {
      double g = 0.0, h = 0.0;
      for (std::size_t r : members) {
        g += grad_[r];
        h += hess_[r];
      }
      tree_.nodes[index].weight = h + params_.lambda_l2 > 0.0 ? -g / (h + params_.lambda_l2) : 0.0;
      return index;
    }
    std::vector<std::size_t> left, right;
    for (std::size_t r : members) {
      (x_(r, split->feature_index) < split->threshold ? left : right).push_back(r);
    }
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    TreeNode& node = tree_.nodes[index];
    node.feature_index = static_cast<int>(split->feature_index);
    node.threshold = split->threshold;
    node.left = l;
    node.right = r;
    return index;
  }

  const FeatureMatrix& x_;
  std::span<const double> grad_;
  std::span<const double> hess_;
  const GbdtParams& params_;
  std::vector<std::vector<std::size_t>> orders_;
  RegressionTree tree_;
};

double mse(std::span<const double> pred, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += (pred[i] - y[i]) * (pred[i] - y[i]);
  return s / static_cast<double>(y.size());
}

}  // namespace

GbdtFitResult fit_gbdt(const FeatureMatrix& x, std::span<const double> labels,
                       const GbdtParams& params, std::vector<std::string> feature_names) {
  params.validate();
  if (x.rows() == 0 || labels.empty()) {
    throw Error(ErrorCode::kEmptyTrainingSet, "GBDT needs at least one training row");
  }
  if (x.rows() != labels.size()) {
    throw Error(ErrorCode::kFeatureLabelLengthMismatch,
                std::to_string(x.rows()) + " feature rows vs " + std::to_string(labels.size()) +
                    " labels");
  }
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (double v : x.row(r)) {
      if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "non-finite feature value");
    }
  }
  if (!feature_names.empty() && feature_names.size() != x.cols()) {
    throw Error(ErrorCode::kFeatureLengthMismatch, "feature name count differs from matrix width");
  }

  GbdtFitResult result;
  GbdtModel& model = result.model;
  model.params = params;
  model.feature_names = std::move(feature_names);
  model.base_score = fit_baseline(labels).mean_score;

  const std::size_t n = x.rows();
  std::vector<double>& pred = result.raw_train_predictions;
  pred.assign(n, model.base_score);
  std::vector<double> grad(n), hess(n, 1.0);
  result.loss_history.push_back(mse(pred, labels));

  TreeBuilder builder(x, grad, hess, params);
  for (int t = 0; t < params.n_trees; ++t) {
    for (std::size_t i = 0; i < n; ++i) grad[i] = pred[i] - labels[i];
    RegressionTree tree = builder.build();
    for (std::size_t i = 0; i < n; ++i) pred[i] += params.learning_rate * tree.predict(x.row(i));
    model.trees.push_back(std::move(tree));
    result.loss_history.push_back(mse(pred, labels));
  }
  return result;
}

double predict_gbdt(const GbdtModel& model, std::span<const double> x) {
  if (x.size() < model.required_features()) {
    throw Error(ErrorCode::kFeatureLengthMismatch,
                "model needs " + std::to_string(model.required_features()) + " features, got " +
                    std::to_string(x.size()));
  }
  return std::clamp(model.predict_raw(x), 0.0, 1.0);
}

std::string model_name(const AnyModel& model) {
  return std::holds_alternative<BaselineModel>(model) ? "baseline" : "gbdt";
}

double predict(const AnyModel& model, std::span<const double> x) {
  if (const auto* b = std::get_if<BaselineModel>(&model)) return predict_baseline(*b, x);
  return predict_gbdt(std::get<GbdtModel>(model), x);
}

const std::vector<std::string>& feature_names(const AnyModel& model) {
  if (const auto* b = std::get_if<BaselineModel>(&model)) return b->feature_names;
  return std::get<GbdtModel>(model).feature_names;
}

namespace {

json node_to_json(const RegressionTree& tree, int i) {
  const TreeNode& n = tree.nodes[i];
  if (n.is_leaf()) return json{{"leaf", n.weight}};
  return json{{"feature", n.feature_index},
              {"threshold", n.threshold},
              {"left", node_to_json(tree, n.left)},
              {"right", node_to_json(tree, n.right)}};
}

int node_from_json(const json& j, RegressionTree& tree, std::size_t n_features) {
  const int index = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (j.contains("leaf")) {
    tree.nodes[index].weight = j.at("leaf").get<double>();
    return index;
  }
  const int feature = j.at("feature").get<int>();
  if (feature < 0 || (n_features > 0 && static_cast<std::size_t>(feature) >= n_features)) {
    throw Error(ErrorCode::kInvalidArgument, "tree references feature outside feature_names");
  }
  const double threshold = j.at("threshold").get<double>();
  const int l = node_from_json(j.at("left"), tree, n_features);
  const int r = node_from_json(j.at("right"), tree, n_features);
  TreeNode& node = tree.nodes[index];
  node.feature_index = feature;
  node.threshold = threshold;
  node.left = l;
  node.right = r;
  return index;
}

json params_to_json(const GbdtParams& p) {
  return json{{"n_trees", p.n_trees},
              {"learning_rate", p.learning_rate},
              {"max_depth", p.max_depth},
              {"lambda_l2", p.lambda_l2},
              {"gamma_min_gain", p.gamma_min_gain},
              {"min_child_weight", p.min_child_weight},
              {"seed", p.seed}};
}

GbdtParams params_from_json(const json& j) {
  GbdtParams p;
  p.n_trees = j.at("n_trees").get<int>();
  p.learning_rate = j.at("learning_rate").get<double>();
  p.max_depth = j.at("max_depth").get<int>();
  p.lambda_l2 = j.at("lambda_l2").get<double>();
  p.gamma_min_gain = j.at("gamma_min_gain").get<double>();
  p.min_child_weight = j.at("min_child_weight").get<double>();
  p.seed = j.at("seed").get<std::uint64_t>();
  p.validate();
  return p;
}

}  // namespace

std::string serialize_model(const AnyModel& model) {
  json doc;
  doc["schema_version"] = kModelSchemaVersion;
  if (const auto* b = std::get_if<BaselineModel>(&model)) {
    doc["model_type"] = "baseline";
    doc["mean_score"] = b->mean_score;
    doc["n_train"] = b->n_train;
    doc["feature_names"] = b->feature_names;
  } else {
    const auto& g = std::get<GbdtModel>(model);
    doc["model_type"] = "gbdt";
    doc["params"] = params_to_json(g.params);
    doc["base_score"] = g.base_score;
    doc["feature_names"] = g.feature_names;
    doc["trees"] = json::array();
    for (const auto& t : g.trees) {
      doc["trees"].push_back(t.nodes.empty() ? json{{"leaf", 0.0}} : node_to_json(t, 0));
    }
  }
  return doc.dump(1) + "\n";
}

AnyModel deserialize_model(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("model file is not JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("schema_version") ||
      !doc["schema_version"].is_number_integer() ||
      doc["schema_version"].get<int>() != kModelSchemaVersion) {
    throw Error(ErrorCode::kSchemaVersionMismatch,
                "expected schema_version " + std::to_string(kModelSchemaVersion));
  }
  try {
    const std::string type = doc.at("model_type").get<std::string>();
    if (type == "baseline") {
      BaselineModel b;
      b.mean_score = doc.at("mean_score").get<double>();
      b.n_train = doc.at("n_train").get<std::size_t>();
      b.feature_names = doc.value("feature_names", std::vector<std::string>{});
      return b;
    }
    if (type == "gbdt") {
      GbdtModel g;
      g.params = params_from_json(doc.at("params"));
      g.base_score = doc.at("base_score").get<double>();
      g.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
      for (const auto& t : doc.at("trees")) {
        RegressionTree tree;
        node_from_json(t, tree, g.feature_names.size());
        g.trees.push_back(std::move(tree));
      }
      return g;
    }
    throw Error(ErrorCode::kInvalidArgument, "unknown model_type '" + type + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed model file: ") + e.what());
  }
}

void save_model(const AnyModel& model, const std::filesystem::path& path) {
  csv::write_file(path, serialize_model(model));
}

AnyModel load_model(const std::filesystem::path& path) {
  return deserialize_model(csv::read_file(path));
}

}  // namespace rehab
