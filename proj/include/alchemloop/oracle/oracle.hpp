#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "alchemloop/molgraph/molecule.hpp"

namespace alchemloop::oracle {

enum class FailureReason { None, GeometryFailed, ConnectivityChanged, ImaginaryFrequency };

const char* failure_reason_name(FailureReason r);
FailureReason failure_reason_from_name(const std::string& name);

struct OracleResult {
  bool stable = false;
  double density = 0.0;    // g/cc, meaningful iff stable
  double solid_hof = 0.0;  // kcal/mol, meaningful iff stable
  FailureReason reason = FailureReason::None;

  friend bool operator==(const OracleResult&, const OracleResult&) = default;
};

struct SublimationCoeffs {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double residual = 0.0;  // RSS of the fit that produced the coefficients
};

struct SurfaceProps {
  double surface_area = 0.0;  // arbitrary units
  double sigma_tot_sq = 0.0;  // electrostatic-potential variability
  double nu = 0.0;            // charge balance, in [0, 0.25]
};

struct RankDeficient : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when an oracle backend cannot deliver a verdict (broken external
// process, malformed response, timeout). Unstable molecules are results,
// not failures.
struct OracleFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// dH_sub = a*SA + b*sqrt(sigma_tot^2 * nu) + c
double heat_of_sublimation(const SurfaceProps& p, const SublimationCoeffs& k);

// Hess's law: dHf(solid) = dHf(gas) - dH_sub
double solid_hof(double gas_hof, double h_sub);

// Ordinary least squares over the basis {SA, sqrt(sigma^2 * nu), 1}.
// Requires at least 3 records with a rank-3 design matrix.
SublimationCoeffs fit_sublimation_coeffs(
    std::span<const std::pair<SurfaceProps, double>> records);

// All synthetic-oracle constants in one place. The values are arbitrary
// calibration choices, scaled so a lone carbon ("C", methane-like) lands
// near 0.9 g/cc; nothing quantitative is claimed about real chemistry.
struct SyntheticConfig {
  // density model: rho = density_scale * MW / sum(volume) * (1 + nitro_bonus * nitro_count).
  // Volumes are close to weight-proportional, so packing is driven mostly
  // by the nitro term rather than by raw element composition.
  double volume_c = 22.3;
  double volume_h = 4.69;
  double volume_n = 23.8;
  double volume_o = 25.7;
  double density_scale = 2.3;
  double nitro_bonus = 0.10;

  // gas heat of formation: per-bond contributions by element pair, scaled
  // by bond order, plus a ring-strain term
  double bond_nn = 35.0;
  double bond_no = 30.0;
  double bond_oo = 50.0;
  double bond_cn = 4.0;
  double bond_cc = -8.0;
  double bond_co = -10.0;
  double bond_ch = -6.0;
  double bond_nh = -4.0;
  double bond_oh = -8.0;
  double order_factor_double = 1.0;
  double order_factor_triple = 1.0;
  double strain_hof = 12.0;

  // ring strain score: per-ring penalties by size; unstable above threshold
  double strain_ring3 = 5.0;
  double strain_ring4 = 2.5;
  double strain_ring5 = 0.5;
  double strain_threshold = 6.0;

  // surface property proxies
  double sa_per_heavy = 3.0;
  double sigma_scale = 0.08;
  double polarity_n = 0.6;
  double polarity_o = 1.0;
  double polarity_charge = 2.0;

  // the SA coefficient acts as a size tax on the solid heat of formation,
  // so growth pays only for compositions that beat it per atom; the large
  // balance coefficient makes the donor/acceptor mix matter
  SublimationCoeffs sublimation{5.0, 18.0, 2.0, 0.0};
};

// Structure-only helpers, exposed for tests and the seed generator.
int nitro_group_count(const molgraph::Molecule& m);
double strain_score(const molgraph::Molecule& m, const SyntheticConfig& cfg);
SurfaceProps surface_props(const molgraph::Molecule& m, const SyntheticConfig& cfg);

// Ground-truth evaluator interface (the DFT slot). Batch evaluation returns
// results in input order regardless of internal parallelism.
class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual OracleResult evaluate(const molgraph::Molecule& m) = 0;
  virtual std::vector<OracleResult> evaluate_batch(std::span<const molgraph::Molecule> batch);
  virtual std::string name() const = 0;
};

class SyntheticOracle final : public Oracle {
 public:
  explicit SyntheticOracle(SyntheticConfig cfg = {}) : cfg_(cfg) {}

  OracleResult evaluate(const molgraph::Molecule& m) override;
  std::vector<OracleResult> evaluate_batch(std::span<const molgraph::Molecule> batch) override;
  std::string name() const override { return "synthetic"; }

  const SyntheticConfig& config() const { return cfg_; }

 private:
  SyntheticConfig cfg_;
};

// One-shot evaluation with default constants.
OracleResult synthetic_evaluate(const molgraph::Molecule& m);

}  // namespace alchemloop::oracle
