#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace alchemloop::surrogate {

struct InsufficientData : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateTargets : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyTestSet : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class TaskKind { Regression, BinaryClassification };

struct TrainConfig {
  int epochs = 50;
  double train_frac = 0.8;
  double val_frac = 0.1;
  double test_frac = 0.1;
  int folds = 5;
  int hidden = 64;
  double learning_rate = 0.05;
  int batch_size = 16;
  std::uint64_t seed = 0;
};

struct Example {
  std::vector<double> x;
  double y = 0.0;
};

// Two-hidden-layer softplus MLP trained with plain SGD. K-fold ensemble:
// for fold k the shuffled index list is rotated by k*n/K, the first 80%
// trains and the next 10% validates; fold weights are the snapshot from
// the epoch with the lowest validation RMSE. Prediction is the mean over
// folds (mean probability for classification). Fully deterministic for a
// fixed seed.
class SurrogateModel {
 public:
  static SurrogateModel train(std::span<const Example> data, TaskKind task,
                              const TrainConfig& cfg);

  double predict(std::span<const double> x) const;
  double predict_fold(std::size_t fold, std::span<const double> x) const;

  TaskKind task() const { return task_; }
  std::size_t fold_count() const { return folds_.size(); }
  std::size_t input_dim() const { return input_dim_; }
  double target_mean() const { return y_mean_; }
  double target_std() const { return y_std_; }

  // Flat parameter dump with a version tag; doubles survive the JSON round
  // trip exactly, so a reloaded model predicts bit-identically.
  nlohmann::json to_json() const;
  static SurrogateModel from_json(const nlohmann::json& j);

  friend bool operator==(const SurrogateModel&, const SurrogateModel&) = default;

  struct FoldParams {
    std::vector<double> w1, b1, w2, b2, w3;
    double b3 = 0.0;

    friend bool operator==(const FoldParams&, const FoldParams&) = default;
  };

 private:
  TaskKind task_ = TaskKind::Regression;
  std::size_t input_dim_ = 0;
  std::size_t hidden_ = 0;
  double y_mean_ = 0.0;
  double y_std_ = 1.0;
  std::vector<FoldParams> folds_;

  double forward(const FoldParams& p, std::span<const double> x) const;
};

struct EvalReport {
  std::size_t n = 0;
  double rmse = 0.0;
  // single-property "top" classification at the given threshold
  double precision = 0.0;
  double recall = 0.0;
  std::size_t true_top = 0;
  std::size_t predicted_top = 0;
  std::size_t true_positive = 0;
  // rank AUC of the prediction against the top labels (for the stability
  // classifier this is the headline classification AUC); NaN when a class
  // is missing
  double auc = 0.0;

  nlohmann::json to_json() const;
};

// RMSE plus top-molecule precision/recall/AUC where "top" means the true
// value is at or above `top_threshold` (use 0.5 for classifiers trained on
// 0/1 labels).
EvalReport evaluate(const SurrogateModel& model, std::span<const Example> test,
                    double top_threshold);

// Rank statistic (Mann-Whitney) with average ranks for ties. Returns NaN
// when either class is empty.
double rank_auc(std::span<const double> scores, std::span<const char> labels);

}  // namespace alchemloop::surrogate
