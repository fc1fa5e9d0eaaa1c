#include "dodreg/diagnostics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace dodreg {

ResidualSet residuals(const FitResult& f, const RegressionDataset& d) {
  require_same_grid(f.map.grid(), d.grid());
  const Grid& g = d.grid();
  const std::size_t m = g.size();
  const auto n_pairs = static_cast<double>(d.size());

  std::vector<MonotoneMap> maps;
  std::vector<double> wds;
  maps.reserve(d.size());
  wds.reserve(d.size());
  std::vector<double> mean(m, 0.0);
  for (const RegressionPair& pair : d.pairs()) {
    const Measure fitted = predict(f, pair.predictor);
    if (fitted.is_point_mass())
      throw std::invalid_argument("degenerate fitted response");
    MonotoneMap r = optimal_map(fitted, pair.response);
    wds.push_back(wasserstein_distance(fitted, pair.response));
    for (std::size_t j = 0; j < m; ++j) mean[j] += r.values()[j];
    maps.push_back(std::move(r));
  }
  for (std::size_t j = 0; j < m; ++j) {
    mean[j] /= n_pairs;
    // flush sub-ulp summation wobble; the mean of nondecreasing vectors is
    // nondecreasing
    if (j > 0 && mean[j] < mean[j - 1]) mean[j] = mean[j - 1];
  }
  return ResidualSet{std::move(maps), MonotoneMap(d.grid_ptr(), std::move(mean)),
                     std::move(wds)};
}

double error_to_truth(const FitResult& f, const MonotoneMap& t0) {
  return map_l2_distance(f.map, t0, f.qn_weights);
}

GoodnessOfFit goodness_of_fit_report(const FitResult& f,
                                     const RegressionDataset& d) {
  const ResidualSet r = residuals(f, d);
  GoodnessOfFit out;
  out.worst_pairs.reserve(d.size());
  for (std::size_t i = 0; i < r.per_pair_wd.size(); ++i)
    out.worst_pairs.emplace_back(i, r.per_pair_wd[i]);
  std::sort(out.worst_pairs.begin(), out.worst_pairs.end(),
            [](const auto& a, const auto& b) {
              if (a.second != b.second) return a.second > b.second;
              return a.first < b.first;
            });
  out.validity_statistic = map_l2_distance(
      r.mean_residual, identity_map(d.grid_ptr()), f.qn_weights);
  return out;
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

ConvergenceTable convergence_study(const ConvergenceConfig& cfg) {
  if (cfg.N_values.empty())
    throw std::invalid_argument("convergence: no N values");
  if (cfg.n_values.empty())
    throw std::invalid_argument("convergence: no n values");
  if (cfg.replications < 1)
    throw std::invalid_argument("convergence: need replications >= 1");
  for (int N : cfg.N_values)
    if (N < 1) throw std::invalid_argument("convergence: N must be positive");
  for (const std::optional<int>& n : cfg.n_values)
    if (n && *n < 2)
      throw std::invalid_argument("convergence: n must be at least 2");
  cfg.mixture.validate();
  cfg.noise.validate();

  ConvergenceTable table;
  table.rows.reserve(cfg.n_values.size() * cfg.N_values.size() *
                     static_cast<std::size_t>(cfg.replications));
  std::uint64_t cell_tag = 0;
  for (const std::optional<int>& n : cfg.n_values) {
    for (int N : cfg.N_values) {
      std::vector<double> errors;
      errors.reserve(static_cast<std::size_t>(cfg.replications));
      for (int rep = 0; rep < cfg.replications; ++rep) {
        // one derived seed per (cell, replication); independent of loop order
        const std::uint64_t child_seed =
            RngStream(cfg.seed,
                      cell_tag * static_cast<std::uint64_t>(cfg.replications) +
                          static_cast<std::uint64_t>(rep))
                .derive_seed();
        const auto start = std::chrono::steady_clock::now();
        const SyntheticDataset data = generate_dataset(
            child_seed, static_cast<std::size_t>(N), cfg.t0, cfg.mixture,
            cfg.noise,
            n ? std::optional<std::size_t>(static_cast<std::size_t>(*n))
              : std::nullopt);
        const FitResult f = fit(data.dataset);
        const double err = error_to_truth(f, cfg.t0);
        const std::chrono::duration<double> elapsed =
            std::chrono::steady_clock::now() - start;
        table.rows.push_back(
            ConvergenceRow{n, N, rep, err, elapsed.count()});
        errors.push_back(err);
      }
      table.medians.push_back(ConvergenceCell{n, N, median(errors)});
      ++cell_tag;
    }
  }

  // Slope of log median error vs log N over the fully observed column.
  std::vector<double> lx, ly;
  for (const ConvergenceCell& c : table.medians) {
    if (c.n || !(c.median_error > 0.0)) continue;
    lx.push_back(std::log(static_cast<double>(c.N)));
    ly.push_back(std::log(c.median_error));
  }
  if (lx.size() >= 2) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      mx += lx[i];
      my += ly[i];
    }
    mx /= static_cast<double>(lx.size());
    my /= static_cast<double>(lx.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    if (sxx > 0.0) table.slope = sxy / sxx;
  }
  return table;
}

}  // namespace dodreg
