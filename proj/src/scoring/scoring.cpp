#include "alchemloop/scoring/scoring.hpp"

#include <cmath>

namespace alchemloop::scoring {

using molgraph::Element;
using molgraph::Molecule;

double zscore(double value, double mean, double std) {
  if (std <= 0.0) throw NonpositiveStd("standard deviation must be positive");
  return (value - mean) / std;
}

double multi_property_score(double z_hof, double z_rho) { return z_hof + z_rho; }

double sigmoid(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

int constraint_indicator(const Molecule& m, const surrogate::SurrogateModel* stability_model,
                         const molgraph::NormStats* feature_stats, double stability_threshold) {
  for (const molgraph::Atom& a : m.atoms()) {
    switch (a.element) {
      case Element::C: case Element::H: case Element::N: case Element::O: break;
      default: return 0;
    }
  }
  if (m.net_formal_charge() != 0) return 0;
  if (stability_model != nullptr) {
    const molgraph::FeatureVector f = molgraph::featurize(m, *feature_stats);
    if (stability_model->predict(f.values) < stability_threshold) return 0;
  }
  return 1;
}

double full_objective(const Molecule& m, const surrogate::SurrogateModel& rho_model,
                      const surrogate::SurrogateModel& hof_model, const PropertyStats& stats,
                      const molgraph::NormStats& feature_stats,
                      const surrogate::SurrogateModel* stability_model,
                      double stability_threshold) {
  const int x = constraint_indicator(m, stability_model, &feature_stats, stability_threshold);
  if (x == 0) return 0.0;
  const molgraph::FeatureVector f = molgraph::featurize(m, feature_stats);
  const double z_rho = zscore(rho_model.predict(f.values), stats.mean_rho, stats.std_rho);
  const double z_hof = zscore(hof_model.predict(f.values), stats.mean_hof, stats.std_hof);
  return x * (sigmoid(z_hof) + sigmoid(z_rho));
}

double Scorer::operator()(const Molecule& m) const {
  return full_objective(m, *rho_, *hof_, stats_, *feature_stats_, stability_, threshold_);
}

double Scorer::predicted_rho(const Molecule& m) const {
  const molgraph::FeatureVector f = molgraph::featurize(m, *feature_stats_);
  return rho_->predict(f.values);
}

double Scorer::predicted_hof(const Molecule& m) const {
  const molgraph::FeatureVector f = molgraph::featurize(m, *feature_stats_);
  return hof_->predict(f.values);
}

}  // namespace alchemloop::scoring
