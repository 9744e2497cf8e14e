#include "alchemloop/oracle/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "alchemloop/molgraph/rings.hpp"
#include "alchemloop/parallel.hpp"

namespace alchemloop::oracle {

using molgraph::Element;
using molgraph::Molecule;

const char* failure_reason_name(FailureReason r) {
  switch (r) {
    case FailureReason::None: return "none";
    case FailureReason::GeometryFailed: return "geometry_failed";
    case FailureReason::ConnectivityChanged: return "connectivity_changed";
    case FailureReason::ImaginaryFrequency: return "imaginary_frequency";
  }
  return "none";
}

FailureReason failure_reason_from_name(const std::string& name) {
  if (name == "geometry_failed") return FailureReason::GeometryFailed;
  if (name == "connectivity_changed") return FailureReason::ConnectivityChanged;
  if (name == "imaginary_frequency") return FailureReason::ImaginaryFrequency;
  return FailureReason::None;
}

double heat_of_sublimation(const SurfaceProps& p, const SublimationCoeffs& k) {
  return k.a * p.surface_area + k.b * std::sqrt(p.sigma_tot_sq * p.nu) + k.c;
}

double solid_hof(double gas_hof, double h_sub) { return gas_hof - h_sub; }

SublimationCoeffs fit_sublimation_coeffs(
    std::span<const std::pair<SurfaceProps, double>> records) {
  if (records.size() < 3) throw RankDeficient("need at least 3 records to fit 3 coefficients");

  // Normal equations A^T A x = A^T y over basis {SA, sqrt(sigma^2*nu), 1}.
  double ata[3][3] = {};
  double aty[3] = {};
  for (const auto& [p, y] : records) {
    const double row[3] = {p.surface_area, std::sqrt(p.sigma_tot_sq * p.nu), 1.0};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) ata[i][j] += row[i] * row[j];
      aty[i] += row[i] * y;
    }
  }

  // Gaussian elimination with partial pivoting; a vanishing pivot relative
  // to the matrix scale means collinear columns.
  double scale = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) scale = std::max(scale, std::fabs(ata[i][j]));
  }
  double m[3][4];
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) m[i][j] = ata[i][j];
    m[i][3] = aty[i];
  }
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r) {
      if (std::fabs(m[r][col]) > std::fabs(m[pivot][col])) pivot = r;
    }
    if (std::fabs(m[pivot][col]) <= 1e-12 * scale) {
      throw RankDeficient("design matrix is rank deficient");
    }
    if (pivot != col) std::swap(m[pivot], m[col]);
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      for (int j = col; j < 4; ++j) m[r][j] -= f * m[col][j];
    }
  }
  SublimationCoeffs k;
  k.a = m[0][3] / m[0][0];
  k.b = m[1][3] / m[1][1];
  k.c = m[2][3] / m[2][2];
  for (const auto& [p, y] : records) {
    const double r = y - heat_of_sublimation(p, k);
    k.residual += r * r;
  }
  return k;
}

// ---------------------------------------------------------------------------
// synthetic oracle
// ---------------------------------------------------------------------------

namespace {

bool has_peroxide_chain(const Molecule& m) {
  // an O-O bond where either oxygen has a second oxygen neighbor
  for (const molgraph::Bond& b : m.bonds()) {
    if (m.atom(b.a).element != Element::O || m.atom(b.b).element != Element::O) continue;
    for (const std::size_t end : {static_cast<std::size_t>(b.a), static_cast<std::size_t>(b.b)}) {
      const std::size_t other = (end == b.a) ? b.b : b.a;
      for (const auto& [v, order] : m.neighbors(end)) {
        if (v != other && m.atom(v).element == Element::O) return true;
      }
    }
  }
  return false;
}

bool n_chain_search(const Molecule& m, std::size_t u, int edges, std::vector<char>& on_path) {
  if (edges == 3) return true;
  on_path[u] = 1;
  for (const auto& [v, order] : m.neighbors(u)) {
    if (order != 1 || on_path[v] || m.atom(v).element != Element::N) continue;
    if (n_chain_search(m, v, edges + 1, on_path)) {
      on_path[u] = 0;
      return true;
    }
  }
  on_path[u] = 0;
  return false;
}

// simple path of three consecutive N-N single bonds (four nitrogens)
bool has_nitrogen_chain(const Molecule& m) {
  std::vector<char> on_path(m.atom_count(), 0);
  for (std::size_t i = 0; i < m.atom_count(); ++i) {
    if (m.atom(i).element != Element::N) continue;
    if (n_chain_search(m, i, 0, on_path)) return true;
  }
  return false;
}

double atom_volume(Element e, const SyntheticConfig& cfg) {
  switch (e) {
    case Element::C: return cfg.volume_c;
    case Element::H: return cfg.volume_h;
    case Element::N: return cfg.volume_n;
    case Element::O: return cfg.volume_o;
  }
  return cfg.volume_c;
}

double pair_energy(Element a, Element b, const SyntheticConfig& cfg) {
  const auto is = [&](Element x, Element y) {
    return (a == x && b == y) || (a == y && b == x);
  };
  if (is(Element::N, Element::N)) return cfg.bond_nn;
  if (is(Element::N, Element::O)) return cfg.bond_no;
  if (is(Element::O, Element::O)) return cfg.bond_oo;
  if (is(Element::C, Element::N)) return cfg.bond_cn;
  if (is(Element::C, Element::C)) return cfg.bond_cc;
  if (is(Element::C, Element::O)) return cfg.bond_co;
  if (is(Element::C, Element::H)) return cfg.bond_ch;
  if (is(Element::N, Element::H)) return cfg.bond_nh;
  if (is(Element::O, Element::H)) return cfg.bond_oh;
  return 0.0;
}

// Bond-additivity sum accumulated as integer counts per (element pair,
// order) so the value is exactly independent of atom ordering.
double gas_hof(const Molecule& m, const SyntheticConfig& cfg) {
  std::size_t counts[4][4][4] = {};  // [elem a][elem b symmetrized][order]
  for (const molgraph::Bond& b : m.bonds()) {
    const int ea = static_cast<int>(m.atom(b.a).element);
    const int eb = static_cast<int>(m.atom(b.b).element);
    counts[std::min(ea, eb)][std::max(ea, eb)][b.order] += 1;
  }
  for (const molgraph::Atom& a : m.atoms()) {
    const int e = static_cast<int>(a.element);
    const int h = static_cast<int>(Element::H);
    counts[std::min(e, h)][std::max(e, h)][1] += a.implicit_h;
  }
  double energy = 0.0;
  for (int a = 0; a < 4; ++a) {
    for (int b = a; b < 4; ++b) {
      for (int order = 1; order <= 3; ++order) {
        if (counts[a][b][order] == 0) continue;
        double f = 1.0;
        if (order == 2) f = cfg.order_factor_double;
        if (order == 3) f = cfg.order_factor_triple;
        energy += static_cast<double>(counts[a][b][order]) * f *
                  pair_energy(static_cast<Element>(a), static_cast<Element>(b), cfg);
      }
    }
  }
  energy += cfg.strain_hof * strain_score(m, cfg);
  return energy;
}

}  // namespace

int nitro_group_count(const Molecule& m) {
  int count = 0;
  for (std::size_t i = 0; i < m.atom_count(); ++i) {
    if (m.atom(i).element != Element::N) continue;
    int terminal_o = 0;
    for (const auto& [v, order] : m.neighbors(i)) {
      if (m.atom(v).element != Element::O) continue;
      int heavy_neighbors = 0;
      for (const auto& [w, o2] : m.neighbors(v)) {
        if (m.atom(w).element != Element::H) ++heavy_neighbors;
      }
      if (heavy_neighbors == 1) ++terminal_o;
    }
    if (terminal_o >= 2) ++count;
  }
  return count;
}

double strain_score(const Molecule& m, const SyntheticConfig& cfg) {
  const molgraph::RingInfo info = molgraph::ring_info(m);
  std::size_t by_size[3] = {0, 0, 0};
  for (const auto& ring : info.rings) {
    if (ring.size() >= 3 && ring.size() <= 5) by_size[ring.size() - 3] += 1;
  }
  return static_cast<double>(by_size[0]) * cfg.strain_ring3 +
         static_cast<double>(by_size[1]) * cfg.strain_ring4 +
         static_cast<double>(by_size[2]) * cfg.strain_ring5;
}

SurfaceProps surface_props(const Molecule& m, const SyntheticConfig& cfg) {
  SurfaceProps p;
  p.surface_area = cfg.sa_per_heavy * static_cast<double>(m.heavy_atom_count());

  std::size_t n_count = 0, o_count = 0, charged = 0;
  int donors = 0;
  int acceptors = 0;
  for (const molgraph::Atom& a : m.atoms()) {
    n_count += (a.element == Element::N);
    o_count += (a.element == Element::O);
    charged += (a.formal_charge != 0);
    if ((a.element == Element::N || a.element == Element::O) && a.implicit_h > 0) ++donors;
    if ((a.element == Element::N || a.element == Element::O) && a.formal_charge <= 0) ++acceptors;
  }
  const double polarity = static_cast<double>(n_count) * cfg.polarity_n +
                          static_cast<double>(o_count) * cfg.polarity_o +
                          static_cast<double>(charged) * cfg.polarity_charge;
  p.sigma_tot_sq = cfg.sigma_scale * polarity * polarity;
  const double total = static_cast<double>(donors + acceptors);
  p.nu = total > 0.0 ? (donors * acceptors) / (total * total) : 0.0;
  return p;
}

OracleResult SyntheticOracle::evaluate(const Molecule& m) {
  OracleResult r;
  if (has_peroxide_chain(m) || has_nitrogen_chain(m)) {
    r.reason = FailureReason::ImaginaryFrequency;
    return r;
  }
  if (m.net_formal_charge() != 0) {
    r.reason = FailureReason::ConnectivityChanged;
    return r;
  }
  if (strain_score(m, cfg_) > cfg_.strain_threshold) {
    r.reason = FailureReason::GeometryFailed;
    return r;
  }
  r.stable = true;
  r.reason = FailureReason::None;

  std::size_t counts[4] = {0, 0, 0, 0};
  for (const molgraph::Atom& a : m.atoms()) {
    counts[static_cast<int>(a.element)] += 1;
    counts[static_cast<int>(Element::H)] += a.implicit_h;
  }
  double volume = 0.0;
  for (int e = 0; e < 4; ++e) {
    volume += static_cast<double>(counts[e]) * atom_volume(static_cast<Element>(e), cfg_);
  }
  r.density = cfg_.density_scale * m.molecular_weight() / volume *
              (1.0 + cfg_.nitro_bonus * nitro_group_count(m));

  const double gas = gas_hof(m, cfg_);
  const double hsub = heat_of_sublimation(surface_props(m, cfg_), cfg_.sublimation);
  r.solid_hof = solid_hof(gas, hsub);
  return r;
}

std::vector<OracleResult> Oracle::evaluate_batch(std::span<const Molecule> batch) {
  std::vector<OracleResult> out(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) out[i] = evaluate(batch[i]);
  return out;
}

std::vector<OracleResult> SyntheticOracle::evaluate_batch(std::span<const Molecule> batch) {
  std::vector<OracleResult> out(batch.size());
  parallel_for(batch.size(), [&](std::size_t i) { out[i] = evaluate(batch[i]); });
  return out;
}

OracleResult synthetic_evaluate(const Molecule& m) { return SyntheticOracle{}.evaluate(m); }

}  // namespace alchemloop::oracle
