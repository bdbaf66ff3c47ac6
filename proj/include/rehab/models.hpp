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

// Score regressors: the training-mean baseline and second-order gradient
// boosted regression trees with exact greedy split search.
//
// Both predict a normalized score in [0, 1]. GBDT prediction is
//   base_score + learning_rate * sum_t tree_t(x)
// clamped to [0, 1]; trees route `value < threshold` left, everything else
// (including equality) right.

#ifndef REHAB_MODELS_HPP_
#define REHAB_MODELS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace rehab {

// Row-major dense matrix of training features.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  static FeatureMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct BaselineModel {
  double mean_score = 0.0;
  std::size_t n_train = 0;
  std::vector<std::string> feature_names;
};

BaselineModel fit_baseline(std::span<const double> labels);
double predict_baseline(const BaselineModel& model, std::span<const double> x);

struct GbdtParams {
  int n_trees = 200;
  double learning_rate = 0.1;
  int max_depth = 3;
  double lambda_l2 = 1.0;
  double gamma_min_gain = 0.0;
  double min_child_weight = 1.0;
  std::uint64_t seed = 42;

  void validate() const;
  bool operator==(const GbdtParams&) const = default;
};

// Flat tree storage; node 0 is the root. Leaves have left == right == -1.
struct TreeNode {
  int feature_index = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double weight = 0.0;  // leaves only

  bool is_leaf() const { return left < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> x) const;
  int depth() const;
  // Highest referenced feature index, or -1 for a single leaf.
  int max_feature_index() const;
  bool operator==(const RegressionTree&) const = default;
};

struct GbdtModel {
  GbdtParams params;
  double base_score = 0.0;
  std::vector<RegressionTree> trees;
  std::vector<std::string> feature_names;

  // Unclamped base + lr * sum of trees.
  double predict_raw(std::span<const double> x) const;
  std::size_t required_features() const;
};

struct SplitCandidate {
  std::size_t feature_index = 0;
  double threshold = 0.0;
  double gain = 0.0;
};

// Exact greedy search over midpoints between consecutive distinct member
// values. Returns the maximal positive-gain split honouring
// min_child_weight; ties go to the lower feature, then the lower threshold.
std::optional<SplitCandidate> find_best_split(const FeatureMatrix& x, std::span<const double> grad,
                                              std::span<const double> hess,
                                              std::span<const std::size_t> members,
                                              const GbdtParams& params);

// Regularized split gain from child gradient/hessian sums.
double split_gain(double g_left, double h_left, double g_right, double h_right,
                  const GbdtParams& params);

struct GbdtFitResult {
  GbdtModel model;
  // Training MSE of the unclamped predictions: entry 0 is the base score,
  // entry t after tree t.
  std::vector<double> loss_history;
  std::vector<double> raw_train_predictions;
};

GbdtFitResult fit_gbdt(const FeatureMatrix& x, std::span<const double> labels,
                       const GbdtParams& params, std::vector<std::string> feature_names = {});

double predict_gbdt(const GbdtModel& model, std::span<const double> x);

inline constexpr int kModelSchemaVersion = 1;

using AnyModel = std::variant<BaselineModel, GbdtModel>;

std::string model_name(const AnyModel& model);
double predict(const AnyModel& model, std::span<const double> x);
const std::vector<std::string>& feature_names(const AnyModel& model);

// Versioned JSON documents; doubles are stored in shortest round-trip form
// so save/load is bit-exact.
std::string serialize_model(const AnyModel& model);
AnyModel deserialize_model(const std::string& text);
void save_model(const AnyModel& model, const std::filesystem::path& path);
AnyModel load_model(const std::filesystem::path& path);

}  // namespace rehab

#endif  // REHAB_MODELS_HPP_
