// dodreg: distribution-on-distribution regression via monotone transport
// maps on a compact interval. Subcommands cover synthetic data generation,
// fitting, prediction, residual diagnostics, convergence studies, and
// count-data ingestion.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dodreg/diagnostics.hpp"
#include "dodreg/estimator.hpp"
#include "dodreg/io.hpp"
#include "dodreg/simulation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dodreg;

namespace {

std::string pad4(std::size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%04zu", i);
  return buf;
}

MonotoneMap parse_t0(const std::string& spec, GridPtr grid) {
  if (spec == "identity") return identity_map(std::move(grid));
  if (spec.rfind("zeta:", 0) == 0) {
    const std::string num = spec.substr(5);
    try {
      std::size_t used = 0;
      const int k = std::stoi(num, &used);
      if (used == num.size()) return zeta_map(k, std::move(grid));
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("invalid map spec '" + spec + "'");
  }
  return read_map_csv(spec, std::move(grid));
}

/// nullopt = rule-of-thumb bandwidth per sample set.
std::optional<double> parse_bandwidth(const std::string& text) {
  if (text == "silverman") return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) {
      if (!(v > 0.0))
        throw std::invalid_argument("bandwidth must be positive");
      return v;
    }
  } catch (const std::invalid_argument& e) {
    if (std::string(e.what()) == "bandwidth must be positive") throw;
  }
  throw std::invalid_argument("invalid bandwidth '" + text +
                              "' (use a positive number or 'silverman')");
}

std::vector<int> parse_int_list(const std::string& text, const char* what) {
  std::vector<int> out;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(cur, &used);
      if (used != cur.size()) throw std::invalid_argument(cur);
      out.push_back(v);
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string("invalid ") + what + " list '" +
                                  text + "'");
    }
  }
  if (out.empty())
    throw std::invalid_argument(std::string("empty ") + what + " list");
  return out;
}

std::vector<std::optional<int>> parse_n_list(const std::string& text) {
  std::vector<std::optional<int>> out;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, ',')) {
    if (cur == "full") {
      out.push_back(std::nullopt);
    } else {
      try {
        std::size_t used = 0;
        const int v = std::stoi(cur, &used);
        if (used != cur.size()) throw std::invalid_argument(cur);
        out.push_back(v);
      } catch (const std::exception&) {
        throw std::invalid_argument("invalid n list '" + text +
                                    "' (integers or 'full')");
      }
    }
  }
  if (out.empty()) throw std::invalid_argument("empty n list");
  return out;
}

BetaMixtureSpec parse_mixture(const std::string& pi_text) {
  BetaMixtureSpec spec;
  if (!pi_text.empty()) {
    std::vector<double> w;
    std::string cur;
    std::istringstream in(pi_text);
    while (std::getline(in, cur, ',')) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cur, &used);
        if (used != cur.size()) throw std::invalid_argument(cur);
        w.push_back(v);
      } catch (const std::exception&) {
        throw std::invalid_argument("invalid mixture weights '" + pi_text +
                                    "'");
      }
    }
    if (w.size() != 3)
      throw std::invalid_argument("mixture weights need exactly 3 values");
    spec.weights = {w[0], w[1], w[2]};
  }
  spec.validate();
  return spec;
}

struct LoadedDataset {
  RegressionDataset dataset;
  GridPtr grid;
};

LoadedDataset load_dataset(const fs::path& manifest_path,
                           std::optional<std::size_t> m_override,
                           std::optional<double> bandwidth, bool clamp) {
  const DatasetManifest manifest = read_manifest(manifest_path);
  const std::size_t m = m_override ? *m_override : manifest.m;
  GridPtr grid = make_grid(manifest.omega_min, manifest.omega_max, m);
  const fs::path base = manifest_path.parent_path();

  const auto smooth = [&](const SampleSet& s) {
    const double bw = bandwidth ? *bandwidth : silverman_bandwidth(s);
    return kde_to_measure(s, bw, grid);
  };
  const auto smooth_weighted = [&](const WeightedSamples& s) {
    const double bw = bandwidth ? *bandwidth : silverman_bandwidth(s);
    return kde_to_measure(s, bw, grid);
  };

  std::vector<RegressionPair> pairs;
  pairs.reserve(manifest.entries.size());
  for (const ManifestEntry& e : manifest.entries) {
    const fs::path pred_path = base / e.predictor;
    const fs::path resp_path = base / e.response;
    if (e.kind == "quantiles") {
      pairs.push_back(RegressionPair{read_quantile_csv(pred_path, grid),
                                     read_quantile_csv(resp_path, grid),
                                     {},
                                     {}});
    } else if (e.kind == "samples") {
      SampleSet pred = read_sample_file(pred_path, grid->omega_min(),
                                        grid->omega_max(), clamp);
      SampleSet resp = read_sample_file(resp_path, grid->omega_min(),
                                        grid->omega_max(), clamp);
      pairs.push_back(RegressionPair{smooth(pred), smooth(resp),
                                     std::move(pred), std::move(resp)});
    } else {  // counts
      pairs.push_back(RegressionPair{
          smooth_weighted(read_counts_csv(pred_path, grid->omega_min(),
                                          grid->omega_max())),
          smooth_weighted(read_counts_csv(resp_path, grid->omega_min(),
                                          grid->omega_max())),
          {},
          {}});
    }
  }
  return LoadedDataset{RegressionDataset(std::move(pairs)), std::move(grid)};
}

NodeWeights predictor_average(const RegressionDataset& d) {
  const std::size_t m = d.grid().size();
  std::vector<double> qn(m, 0.0);
  for (const RegressionPair& pair : d.pairs()) {
    const std::vector<double> w = cell_masses(pair.predictor);
    for (std::size_t j = 0; j < m; ++j) qn[j] += w[j];
  }
  for (double& v : qn) v /= static_cast<double>(d.size());
  return NodeWeights(d.grid_ptr(), std::move(qn));
}

// ---------------------------------------------------------------- simulate

struct SimulateOpts {
  std::size_t N = 0;
  std::uint64_t seed = 1;
  std::string t0 = "zeta:4";
  int segments = 4;
  int k_max = 3;
  std::string pi;
  std::optional<std::size_t> n;
  std::size_t m = 1000;
  std::string out;
};

void run_simulate(const SimulateOpts& o) {
  GridPtr grid = make_grid(0.0, 1.0, o.m);
  const MonotoneMap t0 = parse_t0(o.t0, grid);
  const BetaMixtureSpec mixture = parse_mixture(o.pi);
  const NoiseSpec noise = NoiseSpec::with_k_max(o.segments, o.k_max);
  const SyntheticDataset data =
      generate_dataset(o.seed, o.N, t0, mixture, noise, o.n);

  const fs::path out_dir(o.out);
  fs::create_directories(out_dir);
  DatasetManifest manifest;
  manifest.omega_min = 0.0;
  manifest.omega_max = 1.0;
  manifest.m = o.m;
  const std::string kind = o.n ? "samples" : "quantiles";
  const std::string ext = o.n ? ".txt" : ".csv";
  for (std::size_t i = 0; i < data.dataset.size(); ++i) {
    const RegressionPair& pair = data.dataset.pairs()[i];
    const std::string pred_name = "predictor_" + pad4(i) + ext;
    const std::string resp_name = "response_" + pad4(i) + ext;
    if (o.n) {
      write_sample_file(out_dir / pred_name, *pair.predictor_samples);
      write_sample_file(out_dir / resp_name, *pair.response_samples);
    } else {
      write_quantile_csv(out_dir / pred_name, pair.predictor);
      write_quantile_csv(out_dir / resp_name, pair.response);
    }
    manifest.entries.push_back(
        ManifestEntry{pad4(i), pred_name, resp_name, kind});
    write_map_csv(out_dir / ("noise_map_" + pad4(i) + ".csv"),
                  data.noise_maps[i]);
  }
  write_map_csv(out_dir / "true_map.csv", data.true_map);
  write_manifest(out_dir / "manifest.json", manifest);
  std::cout << "wrote " << data.dataset.size() << " pairs to " << o.out
            << "\n";
}

// --------------------------------------------------------------------- fit

struct FitOpts {
  std::string data;
  std::optional<std::size_t> m;
  std::string bandwidth = "silverman";
  bool clamp = false;
  std::string out;
};

void run_fit(const FitOpts& o) {
  const std::optional<double> bw = parse_bandwidth(o.bandwidth);
  const LoadedDataset loaded = load_dataset(o.data, o.m, bw, o.clamp);
  const FitResult f = fit(loaded.dataset);

  FitReportFile report;
  report.tool_version = kToolVersion;
  report.omega_min = loaded.grid->omega_min();
  report.omega_max = loaded.grid->omega_max();
  report.m = loaded.grid->size();
  report.bandwidth = o.bandwidth;
  report.clamp = o.clamp;
  report.map_values = f.map.values();
  report.map_defined = f.map.defined_mask();
  report.objective = f.objective;
  report.per_pair_wd = f.per_pair_wd;
  try {
    report.validity_statistic =
        goodness_of_fit_report(f, loaded.dataset).validity_statistic;
  } catch (const std::invalid_argument&) {
    report.validity_statistic = std::nullopt;  // degenerate fitted response
  }
  write_fit_report(o.out, report);
  std::cout << "objective " << format_double(f.objective) << ", report "
            << o.out << "\n";
}

// ----------------------------------------------------------------- predict

struct PredictOpts {
  std::string fit;
  std::string input;
  std::string out;
};

void run_predict(const PredictOpts& o) {
  const FitReportFile report = read_fit_report(o.fit);
  GridPtr grid = make_grid(report.omega_min, report.omega_max, report.m);
  const MonotoneMap map(grid, report.map_values, report.map_defined);
  const Measure mu = read_quantile_csv(o.input, grid);
  write_quantile_csv(o.out, pushforward(map, mu));
  std::cout << "wrote " << o.out << "\n";
}

// --------------------------------------------------------------- residuals

struct ResidualOpts {
  std::string fit;
  std::string data;
  std::string out_dir;
};

void run_residuals(const ResidualOpts& o) {
  const FitReportFile report = read_fit_report(o.fit);
  const DatasetManifest manifest = read_manifest(o.data);
  // Quantile files are tied to the manifest grid; sample and count entries
  // are smoothed onto the report grid, so only the domain must agree.
  const bool structural_m =
      std::any_of(manifest.entries.begin(), manifest.entries.end(),
                  [](const ManifestEntry& e) { return e.kind == "quantiles"; });
  if (manifest.omega_min != report.omega_min ||
      manifest.omega_max != report.omega_max ||
      (structural_m && manifest.m != report.m))
    throw std::invalid_argument("grid mismatch");
  // ingest exactly as the fit did: same grid, bandwidth, and clamping
  const LoadedDataset loaded =
      load_dataset(o.data, report.m, parse_bandwidth(report.bandwidth),
                   report.clamp);
  const MonotoneMap map(loaded.grid, report.map_values, report.map_defined);
  const FitResult f{map, report.objective, report.per_pair_wd,
                    report.map_defined, predictor_average(loaded.dataset)};
  const ResidualSet r = residuals(f, loaded.dataset);
  const GoodnessOfFit gof = goodness_of_fit_report(f, loaded.dataset);

  const fs::path out_dir(o.out_dir);
  fs::create_directories(out_dir);
  for (std::size_t i = 0; i < r.residual_maps.size(); ++i)
    write_map_csv(out_dir / ("residual_" + pad4(i) + ".csv"),
                  r.residual_maps[i]);
  write_map_csv(out_dir / "mean_residual.csv", r.mean_residual);
  write_residual_svg(out_dir / "residuals.svg", r);

  json summary;
  summary["validity_statistic"] = gof.validity_statistic;
  summary["per_pair_wd"] = r.per_pair_wd;
  json worst = json::array();
  for (const auto& [idx, wd] : gof.worst_pairs)
    worst.push_back({{"pair", idx}, {"wd", wd}});
  summary["worst_pairs"] = std::move(worst);
  write_file_atomic(out_dir / "summary.json", summary.dump(2) + "\n");
  std::cout << "validity statistic " << format_double(gof.validity_statistic)
            << ", outputs in " << o.out_dir << "\n";
}

// ------------------------------------------------------------- convergence

struct ConvergenceOpts {
  std::string N_list;
  std::string n_list = "full";
  int reps = 20;
  std::uint64_t seed = 1;
  std::size_t m = 1000;
  std::string t0 = "zeta:4";
  int segments = 4;
  int k_max = 3;
  std::string pi;
  std::string out;
};

void run_convergence(const ConvergenceOpts& o) {
  GridPtr grid = make_grid(0.0, 1.0, o.m);
  ConvergenceConfig cfg(parse_t0(o.t0, grid));
  cfg.N_values = parse_int_list(o.N_list, "N");
  cfg.n_values = parse_n_list(o.n_list);
  cfg.replications = o.reps;
  cfg.seed = o.seed;
  cfg.mixture = parse_mixture(o.pi);
  cfg.noise = NoiseSpec::with_k_max(o.segments, o.k_max);
  const ConvergenceTable table = convergence_study(cfg);

  const fs::path out_dir(o.out);
  fs::create_directories(out_dir);
  // wall time stays in memory only: the written table must be byte-stable
  // across runs
  std::string csv = "n,N,replication,error\n";
  for (const ConvergenceRow& row : table.rows) {
    csv += row.n ? std::to_string(*row.n) : "full";
    csv += ',';
    csv += std::to_string(row.N);
    csv += ',';
    csv += std::to_string(row.replication);
    csv += ',';
    csv += format_double(row.error);
    csv += '\n';
  }
  write_file_atomic(out_dir / "table.csv", csv);

  json summary;
  json cells = json::array();
  for (const ConvergenceCell& c : table.medians)
    cells.push_back({{"n", c.n ? json(*c.n) : json(nullptr)},
                     {"N", c.N},
                     {"median_error", c.median_error}});
  summary["cells"] = std::move(cells);
  summary["slope"] = table.slope ? json(*table.slope) : json(nullptr);
  summary["config"] = {{"N_list", o.N_list},     {"n_list", o.n_list},
                       {"replications", o.reps}, {"seed", o.seed},
                       {"m", o.m},               {"t0", o.t0},
                       {"segments", o.segments}, {"k_max", o.k_max}};
  write_file_atomic(out_dir / "summary.json", summary.dump(2) + "\n");
  if (table.slope)
    std::cout << "slope " << format_double(*table.slope) << ", outputs in "
              << o.out << "\n";
  else
    std::cout << "outputs in " << o.out << "\n";
}

// ----------------------------------------------------------- ingest-counts

struct IngestOpts {
  std::string counts;
  std::string out;
  std::vector<std::string> pairs;
  std::string out_dir;
  std::string omega = "0,110";
  std::size_t m = 1000;
  std::string bandwidth = "silverman";
};

std::pair<double, double> parse_omega(const std::string& text) {
  const auto comma = text.find(',');
  if (comma != std::string::npos) {
    try {
      std::size_t used = 0;
      const double lo = std::stod(text.substr(0, comma), &used);
      const std::string hi_text = text.substr(comma + 1);
      const double hi = std::stod(hi_text, &used);
      if (used == hi_text.size() && lo < hi) return {lo, hi};
    } catch (const std::exception&) {
    }
  }
  throw std::invalid_argument("invalid interval '" + text +
                              "' (expected 'lo,hi')");
}

void run_ingest(const IngestOpts& o) {
  const auto [lo, hi] = parse_omega(o.omega);
  GridPtr grid = make_grid(lo, hi, o.m);
  const std::optional<double> bw = parse_bandwidth(o.bandwidth);
  const auto convert = [&](const fs::path& counts_path) {
    const WeightedSamples ws = read_counts_csv(counts_path, lo, hi);
    return kde_to_measure(ws, bw ? *bw : silverman_bandwidth(ws), grid);
  };

  const bool single = !o.counts.empty();
  const bool paired = !o.pairs.empty();
  if (single == paired)
    throw std::invalid_argument(
        "use either --counts with --out or --pair with --out-dir");
  if (single) {
    if (o.out.empty())
      throw std::invalid_argument("--counts requires --out");
    write_quantile_csv(o.out, convert(o.counts));
    std::cout << "wrote " << o.out << "\n";
    return;
  }

  if (o.out_dir.empty())
    throw std::invalid_argument("--pair requires --out-dir");
  const fs::path out_dir(o.out_dir);
  fs::create_directories(out_dir);
  DatasetManifest manifest;
  manifest.omega_min = lo;
  manifest.omega_max = hi;
  manifest.m = o.m;
  for (const std::string& spec : o.pairs) {
    const auto c1 = spec.find(',');
    const auto c2 = (c1 == std::string::npos) ? c1 : spec.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw std::invalid_argument("invalid --pair '" + spec +
                                  "' (expected 'id,predictor,response')");
    const std::string id = spec.substr(0, c1);
    const std::string pred_counts = spec.substr(c1 + 1, c2 - c1 - 1);
    const std::string resp_counts = spec.substr(c2 + 1);
    const std::string pred_name = id + "_predictor.csv";
    const std::string resp_name = id + "_response.csv";
    write_quantile_csv(out_dir / pred_name, convert(pred_counts));
    write_quantile_csv(out_dir / resp_name, convert(resp_counts));
    manifest.entries.push_back(
        ManifestEntry{id, pred_name, resp_name, "quantiles"});
  }
  write_manifest(out_dir / "manifest.json", manifest);
  std::cout << "wrote " << manifest.entries.size() << " pairs to " << o.out_dir
            << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "distribution-on-distribution regression via monotone transport maps"};
  app.require_subcommand(0, 1);

  SimulateOpts sim;
  auto* sim_cmd = app.add_subcommand(
      "simulate", "generate a synthetic dataset from the transport model");
  sim_cmd->add_option("--N", sim.N, "number of predictor/response pairs")
      ->required();
  sim_cmd->add_option("--seed", sim.seed, "RNG seed (default 1)");
  sim_cmd->add_option(
      "--t0", sim.t0,
      "regression map: 'zeta:<k>', 'identity', or a map CSV path");
  sim_cmd->add_option("--J", sim.segments,
                      "noise map segment count (default 4)");
  sim_cmd->add_option("--k-max", sim.k_max,
                      "noise support {-k..k}\\{0}; 0 disables noise");
  sim_cmd->add_option("--pi", sim.pi,
                      "mixture weights 'a,b,c' (default uniform thirds)");
  sim_cmd->add_option("--n", sim.n,
                      "observe each measure through n samples only");
  sim_cmd->add_option("--m", sim.m, "grid cells (default 1000)");
  sim_cmd->add_option("--out", sim.out, "output directory")->required();

  FitOpts fit_opts;
  auto* fit_cmd =
      app.add_subcommand("fit", "fit the regression map to a dataset");
  fit_cmd->add_option("--data", fit_opts.data, "dataset manifest path")
      ->required();
  fit_cmd->add_option("--m", fit_opts.m,
                      "override grid cells for sample/count ingestion");
  fit_cmd->add_option("--bandwidth", fit_opts.bandwidth,
                      "'silverman' or a positive number");
  fit_cmd->add_flag("--clamp", fit_opts.clamp,
                    "clamp out-of-interval samples instead of rejecting");
  fit_cmd->add_option("--out", fit_opts.out, "fit report path")->required();

  PredictOpts pred;
  auto* pred_cmd = app.add_subcommand(
      "predict", "push a predictor through a fitted map");
  pred_cmd->add_option("--fit", pred.fit, "fit report path")->required();
  pred_cmd->add_option("--input", pred.input, "predictor quantile CSV")
      ->required();
  pred_cmd->add_option("--out", pred.out, "output quantile CSV")->required();

  ResidualOpts res;
  auto* res_cmd = app.add_subcommand(
      "residuals", "residual transport maps and model-validity summary");
  res_cmd->add_option("--fit", res.fit, "fit report path")->required();
  res_cmd->add_option("--data", res.data, "dataset manifest path")->required();
  res_cmd->add_option("--out-dir", res.out_dir, "output directory")
      ->required();

  ConvergenceOpts conv;
  auto* conv_cmd = app.add_subcommand(
      "convergence", "Monte Carlo fit-error study over N and n");
  conv_cmd->add_option("--N-list", conv.N_list, "dataset sizes, e.g. 25,100")
      ->required();
  conv_cmd->add_option("--n-list", conv.n_list,
                       "per-measure sample counts or 'full'");
  conv_cmd->add_option("--reps", conv.reps, "replications per cell");
  conv_cmd->add_option("--seed", conv.seed, "RNG seed (default 1)");
  conv_cmd->add_option("--m", conv.m, "grid cells (default 1000)");
  conv_cmd->add_option("--t0", conv.t0, "true map spec (default zeta:4)");
  conv_cmd->add_option("--J", conv.segments, "noise segments (default 4)");
  conv_cmd->add_option("--k-max", conv.k_max, "noise support bound");
  conv_cmd->add_option("--pi", conv.pi, "mixture weights");
  conv_cmd->add_option("--out", conv.out, "output directory")->required();

  IngestOpts ing;
  auto* ing_cmd = app.add_subcommand(
      "ingest-counts", "smooth age/count tables into quantile files");
  ing_cmd->add_option("--counts", ing.counts, "counts CSV (single mode)");
  ing_cmd->add_option("--out", ing.out, "output quantile CSV (single mode)");
  ing_cmd->add_option("--pair", ing.pairs,
                      "'id,predictor.csv,response.csv' (repeatable)");
  ing_cmd->add_option("--out-dir", ing.out_dir,
                      "output directory (pair mode)");
  ing_cmd->add_option("--omega", ing.omega, "interval 'lo,hi' (default 0,110)");
  ing_cmd->add_option("--m", ing.m, "grid cells (default 1000)");
  ing_cmd->add_option("--bandwidth", ing.bandwidth,
                      "'silverman' or a positive number");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  if (app.get_subcommands().empty()) {
    std::cout << app.help();
    return 0;
  }

  try {
    if (*sim_cmd) run_simulate(sim);
    if (*fit_cmd) run_fit(fit_opts);
    if (*pred_cmd) run_predict(pred);
    if (*res_cmd) run_residuals(res);
    if (*conv_cmd) run_convergence(conv);
    if (*ing_cmd) run_ingest(ing);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
