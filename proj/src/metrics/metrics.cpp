#include "alchemloop/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace alchemloop::metrics {

bool dominates(const Point& p, const Point& q) {
  return p.rho >= q.rho && p.hof >= q.hof && (p.rho > q.rho || p.hof > q.hof);
}

ParetoFront pareto_front(std::span<const Point> points) {
  std::vector<Point> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end(), [](const Point& a, const Point& b) {
    return a.rho != b.rho ? a.rho > b.rho : a.hof > b.hof;
  });
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  // Descending rho sweep: a point is non-dominated iff its hof strictly
  // exceeds everything seen so far, except that equal-rho points were
  // sorted by hof so only the first of each rho group can survive.
  ParetoFront front;
  double best_hof = -std::numeric_limits<double>::infinity();
  double prev_rho = std::numeric_limits<double>::quiet_NaN();
  for (const Point& p : sorted) {
    const bool same_rho_group = (p.rho == prev_rho);
    if (!same_rho_group && p.hof > best_hof) {
      front.points.push_back(p);
      best_hof = p.hof;
    }
    prev_rho = p.rho;
  }
  std::reverse(front.points.begin(), front.points.end());  // rho ascending
  return front;
}

bool is_sota(const Point& p, const ParetoFront& front) {
  for (const Point& q : front.points) {
    if (q.rho >= p.rho && q.hof >= p.hof) return false;
  }
  return true;
}

bool is_top(const Point& p, const scoring::PropertyStats& stats) {
  return p.rho >= stats.mean_rho + 3.0 * stats.std_rho &&
         p.hof >= stats.mean_hof + 3.0 * stats.std_hof;
}

double nearest_train_distance(const molgraph::FeatureVector& x,
                              std::span<const molgraph::FeatureVector> train) {
  if (train.empty()) throw EmptyTrainSet("nearest_train_distance with empty training set");
  double best = std::numeric_limits<double>::infinity();
  for (const molgraph::FeatureVector& t : train) {
    best = std::min(best, molgraph::euclidean_distance(x, t));
  }
  return best;
}

TopClassification top_classification(std::span<const double> pred_rho,
                                     std::span<const double> pred_hof,
                                     std::span<const double> true_rho,
                                     std::span<const double> true_hof,
                                     const scoring::PropertyStats& stats) {
  TopClassification c;
  for (std::size_t i = 0; i < pred_rho.size(); ++i) {
    const bool truly = is_top({true_rho[i], true_hof[i]}, stats);
    const bool predicted = is_top({pred_rho[i], pred_hof[i]}, stats);
    c.true_positive += (truly && predicted);
    c.false_positive += (!truly && predicted);
    c.false_negative += (truly && !predicted);
    c.true_negative += (!truly && !predicted);
  }
  return c;
}

}  // namespace alchemloop::metrics
