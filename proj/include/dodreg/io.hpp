#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dodreg/diagnostics.hpp"
#include "dodreg/estimator.hpp"
#include "dodreg/measure.hpp"
#include "dodreg/transport.hpp"

namespace dodreg {

inline constexpr const char* kToolVersion = "0.1.0";

/// Anything wrong with an input file or an output path. Messages carry
/// path and, for parse errors, the 1-based line number.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes via a temp file in the same directory plus rename, so readers
/// never observe partial content and reruns either fully replace a file or
/// leave it untouched.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

/// Shortest representation that round-trips a double exactly.
std::string format_double(double v);

// Quantile CSV: header `p,value`, one row per level, p ascending and
// matching the grid levels.
void write_quantile_csv(const std::filesystem::path& path, const Measure& mu);
Measure read_quantile_csv(const std::filesystem::path& path, GridPtr grid);

// Sample file: one real per line. With clamp set, out-of-interval values
// are moved to the nearest endpoint instead of rejected.
void write_sample_file(const std::filesystem::path& path, const SampleSet& s);
SampleSet read_sample_file(const std::filesystem::path& path, double omega_min,
                           double omega_max, bool clamp);

// Counts CSV: header `age,count`. Each row becomes a point at age + 0.5
// (the midpoint of the one-year bin) weighted by its count; zero-count rows
// are dropped. Negative counts and ages whose bin midpoint falls outside
// [omega_min, omega_max] are rejected with the offending row named.
WeightedSamples read_counts_csv(const std::filesystem::path& path,
                                double omega_min, double omega_max);

// Map CSV: header `x,value,defined`, one row per node.
void write_map_csv(const std::filesystem::path& path, const MonotoneMap& t);
MonotoneMap read_map_csv(const std::filesystem::path& path, GridPtr grid);

/// On-disk description of a regression dataset: the shared grid plus one
/// file pair per observation. Paths are kept relative to the manifest.
struct ManifestEntry {
  std::string id;
  std::string predictor;                 // path relative to the manifest
  std::string response;                  // path relative to the manifest
  std::string kind;                      // quantiles | samples | counts
};

struct DatasetManifest {
  int format_version = 1;
  double omega_min = 0.0;
  double omega_max = 1.0;
  std::size_t m = 2;
  std::vector<ManifestEntry> entries;
};

void write_manifest(const std::filesystem::path& path,
                    const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::filesystem::path& path);

/// Serialized fit: config echo, the fitted map, and fit-quality numbers.
/// Round-trips losslessly through JSON.
struct FitReportFile {
  int format_version = 1;
  std::string tool_version;
  double omega_min = 0.0;
  double omega_max = 1.0;
  std::size_t m = 2;
  std::string bandwidth = "silverman";   // "silverman" or a number
  bool clamp = false;
  std::optional<std::uint64_t> seed;
  std::vector<double> map_values;
  std::vector<bool> map_defined;
  double objective = 0.0;
  std::vector<double> per_pair_wd;
  std::optional<double> validity_statistic;
};

void write_fit_report(const std::filesystem::path& path,
                      const FitReportFile& report);
FitReportFile read_fit_report(const std::filesystem::path& path);

/// Residual overlay chart: every residual map, their mean, and the
/// identity reference, as a self-contained SVG. Deterministic bytes.
void write_residual_svg(const std::filesystem::path& path,
                        const ResidualSet& r);

}  // namespace dodreg
