#include "alchemloop/metrics/report.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "alchemloop/molgraph/smiles.hpp"
#include "alchemloop/parallel.hpp"

namespace alchemloop::metrics {

using loop::LabeledMolecule;
using loop::RunState;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

SourceRow make_row(const std::string& source, std::span<const LabeledMolecule* const> rows,
                   const ParetoFront& seed_front, const scoring::PropertyStats& stats) {
  SourceRow r;
  r.source = source;
  r.labeled = rows.size();
  r.top_rho = kNaN;
  r.top_hof = kNaN;
  r.top_score = kNaN;
  std::size_t stable = 0, top = 0, sota = 0;
  for (const LabeledMolecule* lm : rows) {
    if (!lm->result.stable) continue;
    ++stable;
    const Point p{lm->result.density, lm->result.solid_hof};
    const double score =
        scoring::multi_property_score(scoring::zscore(p.hof, stats.mean_hof, stats.std_hof),
                                      scoring::zscore(p.rho, stats.mean_rho, stats.std_rho));
    if (std::isnan(r.top_rho) || p.rho > r.top_rho) r.top_rho = p.rho;
    if (std::isnan(r.top_hof) || p.hof > r.top_hof) r.top_hof = p.hof;
    if (std::isnan(r.top_score) || score > r.top_score) r.top_score = score;
    top += is_top(p, stats);
    sota += is_sota(p, seed_front);
  }
  const double n = static_cast<double>(rows.size());
  r.pct_stable = rows.empty() ? 0.0 : static_cast<double>(stable) / n;
  r.pct_top = rows.empty() ? 0.0 : static_cast<double>(top) / n;
  r.pct_sota = rows.empty() ? 0.0 : static_cast<double>(sota) / n;
  return r;
}

std::vector<BinnedError> binned_errors(const RunState& state, bool density, double bin_width) {
  // bins over the iteration-guiding model's predicted value; seed histogram
  // over true values
  std::map<long, BinnedError> bins;
  const auto bin_of = [&](double v) { return static_cast<long>(std::floor(v / bin_width)); };
  for (const LabeledMolecule& lm : state.archive) {
    if (lm.iteration < 1 || !lm.result.stable) continue;
    const std::optional<double>& pred = density ? lm.pred_rho : lm.pred_hof;
    if (!pred) continue;
    const double truth = density ? lm.result.density : lm.result.solid_hof;
    const long b = bin_of(*pred);
    BinnedError& be = bins[b];
    be.count += 1;
    be.mean_abs_error += std::fabs(*pred - truth);
  }
  for (const LabeledMolecule& lm : state.archive) {
    if (lm.iteration != 0 || !lm.result.stable) continue;
    const double truth = density ? lm.result.density : lm.result.solid_hof;
    bins[bin_of(truth)].seed_count += 1;
  }
  std::vector<BinnedError> out;
  for (auto& [b, be] : bins) {
    be.bin_low = static_cast<double>(b) * bin_width;
    be.bin_high = be.bin_low + bin_width;
    if (be.count > 0) be.mean_abs_error /= static_cast<double>(be.count);
    out.push_back(be);
  }
  return out;
}

nlohmann::json nan_safe(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

std::string csv_num(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

CampaignReport campaign_report(const RunState& state) {
  if (state.iterations_completed < 1) {
    throw IncompleteState("campaign report needs at least one completed iteration");
  }
  CampaignReport report;
  report.complete = true;
  report.iterations = state.snapshots;

  // seed Pareto front over stable seed points
  std::vector<Point> seed_points;
  std::vector<const LabeledMolecule*> seed_rows;
  std::map<int, std::vector<const LabeledMolecule*>> by_iteration;
  std::vector<const LabeledMolecule*> generated_rows;
  for (const LabeledMolecule& lm : state.archive) {
    if (lm.iteration == 0) {
      seed_rows.push_back(&lm);
      if (lm.result.stable) seed_points.push_back({lm.result.density, lm.result.solid_hof});
    } else {
      by_iteration[lm.iteration].push_back(&lm);
      generated_rows.push_back(&lm);
    }
  }
  const ParetoFront front = pareto_front(seed_points);

  report.table.push_back(make_row("seed", seed_rows, front, state.property_stats));
  for (const auto& [iter, rows] : by_iteration) {
    report.table.push_back(
        make_row("iteration_" + std::to_string(iter), rows, front, state.property_stats));
  }
  report.table.push_back(make_row("generated_all", generated_rows, front, state.property_stats));

  // distance-to-training vs initial-model error, generated stable molecules
  std::vector<molgraph::FeatureVector> seed_feats(seed_rows.size());
  parallel_for(seed_rows.size(), [&](std::size_t i) {
    seed_feats[i] = molgraph::featurize(molgraph::parse_smiles(seed_rows[i]->smiles),
                                        state.feature_stats);
  });
  std::vector<const LabeledMolecule*> de_rows;
  for (const LabeledMolecule* lm : generated_rows) {
    if (lm->result.stable && lm->pred_rho0 && lm->pred_hof0) de_rows.push_back(lm);
  }
  report.distance_error.resize(de_rows.size());
  parallel_for(de_rows.size(), [&](std::size_t i) {
    const LabeledMolecule* lm = de_rows[i];
    const molgraph::FeatureVector f =
        molgraph::featurize(molgraph::parse_smiles(lm->smiles), state.feature_stats);
    report.distance_error[i] = {lm->smiles, lm->iteration, nearest_train_distance(f, seed_feats),
                                std::fabs(*lm->pred_rho0 - lm->result.density),
                                std::fabs(*lm->pred_hof0 - lm->result.solid_hof)};
  });

  report.density_bins = binned_errors(state, true, 0.10);
  report.hof_bins = binned_errors(state, false, 100.0);
  return report;
}

nlohmann::json CampaignReport::to_json() const {
  nlohmann::json j;
  j["complete"] = complete;
  j["table"] = nlohmann::json::array();
  for (const SourceRow& r : table) {
    j["table"].push_back({{"source", r.source},
                          {"labeled", r.labeled},
                          {"valid", r.valid},
                          {"top_rho", nan_safe(r.top_rho)},
                          {"top_hof", nan_safe(r.top_hof)},
                          {"top_score", nan_safe(r.top_score)},
                          {"pct_stable", r.pct_stable},
                          {"pct_top", r.pct_top},
                          {"pct_sota", r.pct_sota}});
  }
  j["iterations"] = nlohmann::json::array();
  for (const auto& s : iterations) j["iterations"].push_back(s.to_json());
  j["distance_error"] = nlohmann::json::array();
  for (const DistanceErrorPair& p : distance_error) {
    j["distance_error"].push_back({{"smiles", p.smiles},
                                   {"iteration", p.iteration},
                                   {"distance", p.distance},
                                   {"rho_error", p.rho_error},
                                   {"hof_error", p.hof_error}});
  }
  const auto bins_json = [](const std::vector<BinnedError>& bins) {
    nlohmann::json a = nlohmann::json::array();
    for (const BinnedError& b : bins) {
      a.push_back({{"bin_low", b.bin_low},
                   {"bin_high", b.bin_high},
                   {"count", b.count},
                   {"mean_abs_error", b.mean_abs_error},
                   {"seed_count", b.seed_count}});
    }
    return a;
  };
  j["density_bins"] = bins_json(density_bins);
  j["hof_bins"] = bins_json(hof_bins);
  return j;
}

std::map<std::string, std::string> CampaignReport::to_csv_tables() const {
  std::map<std::string, std::string> out;
  {
    std::string csv = "source,labeled,valid,top_rho,top_hof,top_score,pct_stable,pct_top,pct_sota\n";
    for (const SourceRow& r : table) {
      csv += r.source + "," + std::to_string(r.labeled) + "," + csv_num(r.valid) + "," +
             csv_num(r.top_rho) + "," + csv_num(r.top_hof) + "," + csv_num(r.top_score) + "," +
             csv_num(r.pct_stable) + "," + csv_num(r.pct_top) + "," + csv_num(r.pct_sota) + "\n";
    }
    out["table1"] = std::move(csv);
  }
  {
    std::string csv =
        "iteration,generated,novel,selected,labeled_stable,labeled_unstable,"
        "holdout_regression_n,rho_rmse,hof_rmse,top_precision,top_recall,stability_auc\n";
    for (const auto& s : iterations) {
      csv += std::to_string(s.iteration) + "," + std::to_string(s.generated) + "," +
             std::to_string(s.novel) + "," + std::to_string(s.selected) + "," +
             std::to_string(s.labeled_stable) + "," + std::to_string(s.labeled_unstable) + "," +
             std::to_string(s.holdout_regression_n) + "," + csv_num(s.rho_rmse) + "," +
             csv_num(s.hof_rmse) + "," + csv_num(s.top_precision) + "," +
             csv_num(s.top_recall) + "," + csv_num(s.stability_auc) + "\n";
    }
    out["iterations"] = std::move(csv);
  }
  {
    std::string csv = "smiles,iteration,distance,rho_error,hof_error\n";
    for (const DistanceErrorPair& p : distance_error) {
      csv += p.smiles + "," + std::to_string(p.iteration) + "," + csv_num(p.distance) + "," +
             csv_num(p.rho_error) + "," + csv_num(p.hof_error) + "\n";
    }
    out["distance_error"] = std::move(csv);
  }
  const auto bins_csv = [](const std::vector<BinnedError>& bins) {
    std::string csv = "bin_low,bin_high,count,mean_abs_error,seed_count\n";
    for (const BinnedError& b : bins) {
      csv += csv_num(b.bin_low) + "," + csv_num(b.bin_high) + "," + std::to_string(b.count) +
             "," + csv_num(b.mean_abs_error) + "," + std::to_string(b.seed_count) + "\n";
    }
    return csv;
  };
  out["density_bins"] = bins_csv(density_bins);
  out["hof_bins"] = bins_csv(hof_bins);
  return out;
}

std::string feature_matrix_csv(const RunState& state) {
  std::string csv = "smiles,iteration,stable";
  for (std::size_t j = 0; j < state.feature_stats.dim(); ++j) {
    csv += ",f" + std::to_string(j);
  }
  csv += "\n";
  std::vector<std::string> lines(state.archive.size());
  parallel_for(state.archive.size(), [&](std::size_t i) {
    const LabeledMolecule& lm = state.archive[i];
    const molgraph::FeatureVector f =
        molgraph::featurize(molgraph::parse_smiles(lm.smiles), state.feature_stats);
    std::string line = lm.smiles + "," + std::to_string(lm.iteration) + "," +
                       (lm.result.stable ? "1" : "0");
    for (const double v : f.values) line += "," + csv_num(v);
    lines[i] = std::move(line);
  });
  for (std::string& line : lines) {
    csv += line;
    csv += "\n";
  }
  return csv;
}

}  // namespace alchemloop::metrics
