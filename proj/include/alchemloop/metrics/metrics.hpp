#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "alchemloop/molgraph/descriptors.hpp"
#include "alchemloop/scoring/scoring.hpp"

namespace alchemloop::metrics {

struct EmptyTrainSet : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Point {
  double rho = 0.0;
  double hof = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

// p dominates q: >= in both coordinates and > in at least one (both
// properties are maximized).
bool dominates(const Point& p, const Point& q);

// Mutually non-dominated subset, sorted by rho ascending; exact duplicate
// coordinate pairs collapse to one entry.
struct ParetoFront {
  std::vector<Point> points;
};

ParetoFront pareto_front(std::span<const Point> points);

// Strictly beyond the front: no front point weakly dominates p (>= in both
// coordinates). Points on the front do not count.
bool is_sota(const Point& p, const ParetoFront& front);

// At or above three standard deviations over the seed mean in both
// properties (closed thresholds).
bool is_top(const Point& p, const scoring::PropertyStats& stats);

double nearest_train_distance(const molgraph::FeatureVector& x,
                              std::span<const molgraph::FeatureVector> train);

// Aggregate counts for multi-property top classification (both predicted
// values against both true values, 3-sigma thresholds from the seed stats).
struct TopClassification {
  std::size_t true_positive = 0;
  std::size_t false_positive = 0;
  std::size_t false_negative = 0;
  std::size_t true_negative = 0;

  double precision() const {
    const std::size_t p = true_positive + false_positive;
    return p > 0 ? static_cast<double>(true_positive) / static_cast<double>(p) : 0.0;
  }
  double recall() const {
    const std::size_t t = true_positive + false_negative;
    return t > 0 ? static_cast<double>(true_positive) / static_cast<double>(t) : 0.0;
  }
};

TopClassification top_classification(std::span<const double> pred_rho,
                                     std::span<const double> pred_hof,
                                     std::span<const double> true_rho,
                                     std::span<const double> true_hof,
                                     const scoring::PropertyStats& stats);

}  // namespace alchemloop::metrics
