#pragma once

#include <stdexcept>

#include "alchemloop/molgraph/descriptors.hpp"
#include "alchemloop/molgraph/molecule.hpp"
#include "alchemloop/surrogate/surrogate.hpp"

namespace alchemloop::scoring {

struct NonpositiveStd : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Seed-dataset property statistics; frozen for a run.
struct PropertyStats {
  double mean_rho = 0.0;
  double std_rho = 1.0;
  double mean_hof = 0.0;
  double std_hof = 1.0;
};

double zscore(double value, double mean, double std);  // throws NonpositiveStd

// Multi-Property Score: the sum of the two standard scores.
double multi_property_score(double z_hof, double z_rho);

double sigmoid(double x);

// 1 iff the molecule is CHON-only with net formal charge zero and, when a
// stability classifier is supplied, its predicted stable probability is at
// or above the threshold.
int constraint_indicator(const molgraph::Molecule& m,
                         const surrogate::SurrogateModel* stability_model,
                         const molgraph::NormStats* feature_stats,
                         double stability_threshold = 0.5);

// Full Objective Score: X * (sigmoid(z_hof) + sigmoid(z_rho)) with z-scores
// of the surrogate-predicted properties; in [0, 2].
double full_objective(const molgraph::Molecule& m, const surrogate::SurrogateModel& rho_model,
                      const surrogate::SurrogateModel& hof_model, const PropertyStats& stats,
                      const molgraph::NormStats& feature_stats,
                      const surrogate::SurrogateModel* stability_model = nullptr,
                      double stability_threshold = 0.5);

// Bundles the models and statistics behind a plain molecule-to-score
// callable for the generator and selection code.
class Scorer {
 public:
  Scorer(const surrogate::SurrogateModel* rho_model, const surrogate::SurrogateModel* hof_model,
         const surrogate::SurrogateModel* stability_model, PropertyStats stats,
         const molgraph::NormStats* feature_stats, double stability_threshold = 0.5)
      : rho_(rho_model),
        hof_(hof_model),
        stability_(stability_model),
        stats_(stats),
        feature_stats_(feature_stats),
        threshold_(stability_threshold) {}

  double operator()(const molgraph::Molecule& m) const;
  double predicted_rho(const molgraph::Molecule& m) const;
  double predicted_hof(const molgraph::Molecule& m) const;
  bool has_stability_gate() const { return stability_ != nullptr; }

 private:
  const surrogate::SurrogateModel* rho_;
  const surrogate::SurrogateModel* hof_;
  const surrogate::SurrogateModel* stability_;
  PropertyStats stats_;
  const molgraph::NormStats* feature_stats_;
  double threshold_;
};

}  // namespace alchemloop::scoring
