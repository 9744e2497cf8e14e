#include "alchemloop/molgraph/descriptors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "alchemloop/molgraph/rings.hpp"

namespace alchemloop::molgraph {

std::vector<double> raw_descriptors(const Molecule& m, std::size_t dim) {
  if (dim < 20) throw std::invalid_argument("feature dimension must be at least 20");
  std::vector<double> d(dim, 0.0);

  const std::size_t heavy = m.heavy_atom_count();
  d[0] = static_cast<double>(heavy);
  d[1] = m.molecular_weight();

  double counts[4] = {0, 0, 0, 0};
  for (const Atom& a : m.atoms()) {
    counts[static_cast<int>(a.element)] += 1.0;
    counts[static_cast<int>(Element::H)] += a.implicit_h;
  }
  const double total = counts[0] + counts[1] + counts[2] + counts[3];
  d[2] = counts[static_cast<int>(Element::C)] / total;
  d[3] = counts[static_cast<int>(Element::H)] / total;
  d[4] = counts[static_cast<int>(Element::N)] / total;
  d[5] = counts[static_cast<int>(Element::O)] / total;

  for (const Bond& b : m.bonds()) {
    const Element ea = m.atom(b.a).element;
    const Element eb = m.atom(b.b).element;
    const auto pair_is = [&](Element x, Element y) {
      return (ea == x && eb == y) || (ea == y && eb == x);
    };
    if (pair_is(Element::N, Element::O)) d[6] += 1.0;
    if (pair_is(Element::N, Element::N)) d[7] += 1.0;
    if (pair_is(Element::C, Element::N)) d[8] += 1.0;
    if (pair_is(Element::O, Element::O)) d[9] += 1.0;
  }

  const RingInfo rings = ring_info(m);
  d[10] = static_cast<double>(rings.ring_count);
  d[11] = static_cast<double>(rings.max_ring_size);

  for (std::size_t i = 0; i < m.atom_count(); ++i) {
    if (m.atom(i).element == Element::H) continue;
    int heavy_degree = 0;
    for (const auto& [v, order] : m.neighbors(i)) {
      if (m.atom(v).element != Element::H) ++heavy_degree;
    }
    if (heavy_degree >= 1 && heavy_degree <= 4) d[11 + heavy_degree] += 1.0;
    if (heavy_degree >= 3) d[19] += 1.0;

    const Atom& a = m.atom(i);
    if (a.element == Element::N || a.element == Element::O) {
      if (a.implicit_h > 0) d[16] += 1.0;
      if (a.formal_charge <= 0) d[17] += 1.0;
    }
    if (a.formal_charge != 0) d[18] += 1.0;
  }
  return d;
}

NormStats compute_norm_stats(std::span<const Molecule> dataset, std::size_t dim) {
  if (dataset.empty()) throw std::invalid_argument("empty dataset for normalization stats");
  NormStats stats;
  stats.mean.assign(dim, 0.0);
  stats.stddev.assign(dim, 0.0);
  std::vector<std::vector<double>> raws;
  raws.reserve(dataset.size());
  for (const Molecule& m : dataset) raws.push_back(raw_descriptors(m, dim));
  const double n = static_cast<double>(raws.size());
  for (const auto& r : raws) {
    for (std::size_t j = 0; j < dim; ++j) stats.mean[j] += r[j];
  }
  for (std::size_t j = 0; j < dim; ++j) stats.mean[j] /= n;
  for (const auto& r : raws) {
    for (std::size_t j = 0; j < dim; ++j) {
      const double diff = r[j] - stats.mean[j];
      stats.stddev[j] += diff * diff;
    }
  }
  for (std::size_t j = 0; j < dim; ++j) stats.stddev[j] = std::sqrt(stats.stddev[j] / n);
  return stats;
}

FeatureVector featurize(const Molecule& m, const NormStats& stats) {
  const std::size_t dim = stats.dim();
  std::vector<double> raw = raw_descriptors(m, dim);
  FeatureVector f;
  f.values.resize(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    const double s = std::max(stats.stddev[j], 1e-8);
    f.values[j] = (raw[j] - stats.mean[j]) / s;
  }
  return f;
}

double euclidean_distance(const FeatureVector& a, const FeatureVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("feature dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.values[i] - b.values[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace alchemloop::molgraph
