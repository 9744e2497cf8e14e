#include "alchemloop/surrogate/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "alchemloop/parallel.hpp"
#include "alchemloop/rng.hpp"

namespace alchemloop::surrogate {

namespace {

double softplus(double x) {
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

struct Workspace {
  std::vector<double> h1, a1, h2, a2;        // pre/post activations
  std::vector<double> d1, d2;                // backprop deltas
  std::vector<double> gw1, gb1, gw2, gb2, gw3;
  double gb3 = 0.0;

  void resize(std::size_t in, std::size_t hidden) {
    h1.resize(hidden);
    a1.resize(hidden);
    h2.resize(hidden);
    a2.resize(hidden);
    d1.resize(hidden);
    d2.resize(hidden);
    gw1.assign(in * hidden, 0.0);
    gb1.assign(hidden, 0.0);
    gw2.assign(hidden * hidden, 0.0);
    gb2.assign(hidden, 0.0);
    gw3.assign(hidden, 0.0);
    gb3 = 0.0;
  }

  void zero_grads() {
    std::fill(gw1.begin(), gw1.end(), 0.0);
    std::fill(gb1.begin(), gb1.end(), 0.0);
    std::fill(gw2.begin(), gw2.end(), 0.0);
    std::fill(gb2.begin(), gb2.end(), 0.0);
    std::fill(gw3.begin(), gw3.end(), 0.0);
    gb3 = 0.0;
  }
};

double raw_forward(const SurrogateModel::FoldParams& p, std::span<const double> x,
                   std::size_t hidden, Workspace* ws) {
  thread_local Workspace local;
  Workspace& w = ws ? *ws : local;
  if (w.a1.size() != hidden) w.resize(x.size(), hidden);
  for (std::size_t j = 0; j < hidden; ++j) {
    double s = p.b1[j];
    const double* row = &p.w1[j * x.size()];
    for (std::size_t i = 0; i < x.size(); ++i) s += row[i] * x[i];
    w.h1[j] = s;
    w.a1[j] = softplus(s);
  }
  for (std::size_t j = 0; j < hidden; ++j) {
    double s = p.b2[j];
    const double* row = &p.w2[j * hidden];
    for (std::size_t i = 0; i < hidden; ++i) s += row[i] * w.a1[i];
    w.h2[j] = s;
    w.a2[j] = softplus(s);
  }
  double out = p.b3;
  for (std::size_t j = 0; j < hidden; ++j) out += p.w3[j] * w.a2[j];
  return out;
}

// Accumulates gradients of 0.5*(net(x) - t)^2 for regression or
// 0.5*(sigmoid(net(x)) - t)^2 for classification.
void accumulate_grads(const SurrogateModel::FoldParams& p, std::span<const double> x, double t,
                      bool classification, std::size_t hidden, Workspace& w) {
  const double raw = raw_forward(p, x, hidden, &w);
  double dout;
  if (classification) {
    const double prob = sigmoid(raw);
    dout = (prob - t) * prob * (1.0 - prob);
  } else {
    dout = raw - t;
  }

  w.gb3 += dout;
  for (std::size_t j = 0; j < hidden; ++j) {
    w.gw3[j] += dout * w.a2[j];
    w.d2[j] = dout * p.w3[j] * sigmoid(w.h2[j]);  // softplus' = sigmoid
  }
  for (std::size_t j = 0; j < hidden; ++j) {
    const double dj = w.d2[j];
    w.gb2[j] += dj;
    double* row = &w.gw2[j * hidden];
    for (std::size_t i = 0; i < hidden; ++i) row[i] += dj * w.a1[i];
  }
  for (std::size_t i = 0; i < hidden; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < hidden; ++j) s += w.d2[j] * p.w2[j * hidden + i];
    w.d1[i] = s * sigmoid(w.h1[i]);
  }
  for (std::size_t j = 0; j < hidden; ++j) {
    const double dj = w.d1[j];
    w.gb1[j] += dj;
    double* row = &w.gw1[j * x.size()];
    for (std::size_t i = 0; i < x.size(); ++i) row[i] += dj * x[i];
  }
}

SurrogateModel::FoldParams init_params(std::size_t in, std::size_t hidden, Rng& rng) {
  SurrogateModel::FoldParams p;
  const auto xavier = [&](std::size_t fan_in, std::size_t fan_out, std::vector<double>& w,
                          std::size_t count) {
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    w.resize(count);
    for (double& v : w) v = (2.0 * rng.unit() - 1.0) * a;
  };
  xavier(in, hidden, p.w1, in * hidden);
  p.b1.assign(hidden, 0.0);
  xavier(hidden, hidden, p.w2, hidden * hidden);
  p.b2.assign(hidden, 0.0);
  xavier(hidden, 1, p.w3, hidden);
  p.b3 = 0.0;
  return p;
}

void sgd_step(SurrogateModel::FoldParams& p, const Workspace& w, double lr, double inv_batch) {
  const double s = lr * inv_batch;
  for (std::size_t i = 0; i < p.w1.size(); ++i) p.w1[i] -= s * w.gw1[i];
  for (std::size_t i = 0; i < p.b1.size(); ++i) p.b1[i] -= s * w.gb1[i];
  for (std::size_t i = 0; i < p.w2.size(); ++i) p.w2[i] -= s * w.gw2[i];
  for (std::size_t i = 0; i < p.b2.size(); ++i) p.b2[i] -= s * w.gb2[i];
  for (std::size_t i = 0; i < p.w3.size(); ++i) p.w3[i] -= s * w.gw3[i];
  p.b3 -= s * w.gb3;
}

}  // namespace

SurrogateModel SurrogateModel::train(std::span<const Example> data, TaskKind task,
                                     const TrainConfig& cfg) {
  if (data.size() < 50) {
    throw InsufficientData("training requires at least 50 examples, got " +
                           std::to_string(data.size()));
  }
  const std::size_t dim = data.front().x.size();
  for (const Example& e : data) {
    if (e.x.size() != dim) throw DimensionMismatch("inconsistent feature dimensions");
    if (!std::isfinite(e.y)) throw DegenerateTargets("non-finite training target");
  }

  double mean = 0.0;
  for (const Example& e : data) mean += e.y;
  mean /= static_cast<double>(data.size());
  double var = 0.0;
  for (const Example& e : data) var += (e.y - mean) * (e.y - mean);
  var /= static_cast<double>(data.size());
  if (var == 0.0) throw DegenerateTargets("targets have zero variance");
  if (task == TaskKind::BinaryClassification) {
    bool has0 = false, has1 = false;
    for (const Example& e : data) {
      if (e.y == 0.0) has0 = true;
      else if (e.y == 1.0) has1 = true;
      else throw DegenerateTargets("classification targets must be 0 or 1");
    }
    if (!has0 || !has1) throw DegenerateTargets("classification needs both classes");
  }

  SurrogateModel model;
  model.task_ = task;
  model.input_dim_ = dim;
  model.hidden_ = static_cast<std::size_t>(cfg.hidden);
  if (task == TaskKind::Regression) {
    model.y_mean_ = mean;
    model.y_std_ = std::sqrt(var);
  } else {
    model.y_mean_ = 0.0;
    model.y_std_ = 1.0;
  }

  const std::size_t n = data.size();
  std::vector<std::size_t> base_order(n);
  std::iota(base_order.begin(), base_order.end(), 0);
  {
    Rng shuffle_rng(derive_seed(cfg.seed, "shuffle"));
    for (std::size_t i = n; i > 1; --i) {
      std::swap(base_order[i - 1], base_order[shuffle_rng.index(i)]);
    }
  }

  const bool classification = task == TaskKind::BinaryClassification;
  const std::size_t hidden = model.hidden_;
  const int folds = std::max(1, cfg.folds);
  model.folds_.resize(folds);

  const auto norm_y = [&](double y) { return (y - model.y_mean_) / model.y_std_; };

  parallel_for(static_cast<std::size_t>(folds), [&](std::size_t fold) {
    // rotate the shuffled order so each fold sees a different 80/10 split
    std::vector<std::size_t> order(n);
    const std::size_t shift = (n * fold) / static_cast<std::size_t>(folds);
    for (std::size_t i = 0; i < n; ++i) order[i] = base_order[(i + shift) % n];
    const std::size_t n_train = static_cast<std::size_t>(cfg.train_frac * static_cast<double>(n));
    const std::size_t n_val =
        std::max<std::size_t>(1, static_cast<std::size_t>(cfg.val_frac * static_cast<double>(n)));

    Rng rng(derive_seed(cfg.seed, "fold/" + std::to_string(fold)));
    FoldParams params = init_params(dim, hidden, rng);
    FoldParams best = params;
    double best_val = std::numeric_limits<double>::infinity();

    const auto val_rmse = [&](const FoldParams& p) {
      double se = 0.0;
      for (std::size_t i = n_train; i < std::min(n_train + n_val, n); ++i) {
        const Example& e = data[order[i]];
        double pred = raw_forward(p, e.x, hidden, nullptr);
        double target;
        if (classification) {
          pred = sigmoid(pred);
          target = e.y;
        } else {
          target = norm_y(e.y);
        }
        se += (pred - target) * (pred - target);
      }
      return std::sqrt(se / static_cast<double>(n_val));
    };

    std::vector<std::size_t> train_idx(order.begin(), order.begin() + n_train);
    Workspace ws;
    ws.resize(dim, hidden);
    const std::size_t batch = std::max(1, cfg.batch_size);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      for (std::size_t i = train_idx.size(); i > 1; --i) {
        std::swap(train_idx[i - 1], train_idx[rng.index(i)]);
      }
      for (std::size_t start = 0; start < train_idx.size(); start += batch) {
        const std::size_t stop = std::min(start + batch, train_idx.size());
        ws.zero_grads();
        for (std::size_t i = start; i < stop; ++i) {
          const Example& e = data[train_idx[i]];
          accumulate_grads(params, e.x, classification ? e.y : norm_y(e.y), classification,
                           hidden, ws);
        }
        sgd_step(params, ws, cfg.learning_rate, 1.0 / static_cast<double>(stop - start));
      }
      const double v = val_rmse(params);
      if (v < best_val) {
        best_val = v;
        best = params;
      }
    }
    model.folds_[fold] = std::move(best);
  });

  return model;
}

double SurrogateModel::forward(const FoldParams& p, std::span<const double> x) const {
  return raw_forward(p, x, hidden_, nullptr);
}

double SurrogateModel::predict_fold(std::size_t fold, std::span<const double> x) const {
  if (x.size() != input_dim_) {
    throw DimensionMismatch("expected input dimension " + std::to_string(input_dim_) + ", got " +
                            std::to_string(x.size()));
  }
  const double raw = forward(folds_[fold], x);
  if (task_ == TaskKind::BinaryClassification) return sigmoid(raw);
  return raw * y_std_ + y_mean_;
}

double SurrogateModel::predict(std::span<const double> x) const {
  if (x.size() != input_dim_) {
    throw DimensionMismatch("expected input dimension " + std::to_string(input_dim_) + ", got " +
                            std::to_string(x.size()));
  }
  double s = 0.0;
  for (std::size_t k = 0; k < folds_.size(); ++k) s += predict_fold(k, x);
  return s / static_cast<double>(folds_.size());
}

nlohmann::json SurrogateModel::to_json() const {
  nlohmann::json j;
  j["format"] = "alchemloop-surrogate-v1";
  j["task"] = task_ == TaskKind::Regression ? "regression" : "classification";
  j["input_dim"] = input_dim_;
  j["hidden"] = hidden_;
  j["y_mean"] = y_mean_;
  j["y_std"] = y_std_;
  j["folds"] = nlohmann::json::array();
  for (const FoldParams& p : folds_) {
    j["folds"].push_back({{"w1", p.w1},
                          {"b1", p.b1},
                          {"w2", p.w2},
                          {"b2", p.b2},
                          {"w3", p.w3},
                          {"b3", p.b3}});
  }
  return j;
}

SurrogateModel SurrogateModel::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "alchemloop-surrogate-v1") {
    throw std::invalid_argument("unrecognized surrogate checkpoint format");
  }
  SurrogateModel m;
  m.task_ = j.at("task").get<std::string>() == "regression" ? TaskKind::Regression
                                                            : TaskKind::BinaryClassification;
  m.input_dim_ = j.at("input_dim").get<std::size_t>();
  m.hidden_ = j.at("hidden").get<std::size_t>();
  m.y_mean_ = j.at("y_mean").get<double>();
  m.y_std_ = j.at("y_std").get<double>();
  for (const auto& f : j.at("folds")) {
    FoldParams p;
    p.w1 = f.at("w1").get<std::vector<double>>();
    p.b1 = f.at("b1").get<std::vector<double>>();
    p.w2 = f.at("w2").get<std::vector<double>>();
    p.b2 = f.at("b2").get<std::vector<double>>();
    p.w3 = f.at("w3").get<std::vector<double>>();
    p.b3 = f.at("b3").get<double>();
    m.folds_.push_back(std::move(p));
  }
  return m;
}

double rank_auc(std::span<const double> scores, std::span<const char> labels) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::size_t positives = 0;
  for (const char l : labels) positives += (l != 0);
  const std::size_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) return std::numeric_limits<double>::quiet_NaN();

  // average ranks over tied scores
  std::vector<double> rank(scores.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && scores[idx[j + 1]] == scores[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
    for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = avg;
    i = j + 1;
  }
  double rank_sum = 0.0;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (labels[k]) rank_sum += rank[k];
  }
  const double p = static_cast<double>(positives);
  const double q = static_cast<double>(negatives);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * q);
}

EvalReport evaluate(const SurrogateModel& model, std::span<const Example> test,
                    double top_threshold) {
  if (test.empty()) throw EmptyTestSet("evaluate called with an empty test set");
  EvalReport r;
  r.n = test.size();
  std::vector<double> preds(test.size());
  std::vector<char> labels(test.size());
  double se = 0.0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    preds[i] = model.predict(test[i].x);
    const double err = preds[i] - test[i].y;
    se += err * err;
    labels[i] = test[i].y >= top_threshold ? 1 : 0;
    const bool pred_top = preds[i] >= top_threshold;
    r.true_top += labels[i];
    r.predicted_top += pred_top;
    r.true_positive += (labels[i] && pred_top);
  }
  r.rmse = std::sqrt(se / static_cast<double>(test.size()));
  r.precision = r.predicted_top > 0
                    ? static_cast<double>(r.true_positive) / static_cast<double>(r.predicted_top)
                    : 0.0;
  r.recall = r.true_top > 0
                 ? static_cast<double>(r.true_positive) / static_cast<double>(r.true_top)
                 : 0.0;
  r.auc = rank_auc(preds, labels);
  return r;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j{{"n", n},
                   {"rmse", rmse},
                   {"precision", precision},
                   {"recall", recall},
                   {"true_top", true_top},
                   {"predicted_top", predicted_top},
                   {"true_positive", true_positive}};
  if (std::isnan(auc)) {
    j["auc"] = nullptr;
  } else {
    j["auc"] = auc;
  }
  return j;
}

}  // namespace alchemloop::surrogate
