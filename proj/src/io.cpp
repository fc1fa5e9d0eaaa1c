#include "dodreg/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace dodreg {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r'))
    --e;
  return s.substr(b, e - b);
}

[[noreturn]] void fail_at(const fs::path& path, std::size_t line,
                          const std::string& what) {
  throw IoError(path.string() + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(std::move(line));
  return lines;
}

double parse_double(const std::string& field, const fs::path& path,
                    std::size_t line) {
  const std::string t = trim(field);
  if (!t.empty()) {
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end == t.c_str() + t.size() && std::isfinite(v)) return v;
  }
  fail_at(path, line, "invalid number '" + trim(field) + "'");
}

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

void require_header(const std::vector<std::string>& lines,
                    const std::string& header, const fs::path& path) {
  if (lines.empty() || trim(lines[0]) != header)
    fail_at(path, 1, "expected header '" + header + "'");
}

json parse_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

// Narrow accessors that turn missing/mistyped JSON fields into IoError.
template <typename T>
T get_field(const json& j, const char* key, const fs::path& path) {
  if (!j.contains(key))
    throw IoError(path.string() + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw IoError(path.string() + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace

void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path dir = path.parent_path();
  if (!dir.empty()) fs::create_directories(dir);
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_quantile_csv(const fs::path& path, const Measure& mu) {
  const Grid& g = mu.grid();
  std::string out = "p,value\n";
  for (std::size_t k = 0; k < g.size(); ++k) {
    out += format_double(g.level(k));
    out += ',';
    out += format_double(mu.quantiles()[k]);
    out += '\n';
  }
  write_file_atomic(path, out);
}

Measure read_quantile_csv(const fs::path& path, GridPtr grid) {
  const std::vector<std::string> lines = read_lines(path);
  require_header(lines, "p,value", path);
  const std::size_t m = grid->size();
  if (lines.size() != m + 1)
    throw IoError(path.string() + ": expected " + std::to_string(m) +
                  " rows for the grid, found " +
                  std::to_string(lines.size() - (lines.empty() ? 0 : 1)));
  std::vector<double> q(m);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t lineno = k + 2;
    const auto fields = split_csv_row(lines[k + 1]);
    if (fields.size() != 2) fail_at(path, lineno, "expected 2 fields");
    const double p = parse_double(fields[0], path, lineno);
    if (std::abs(p - grid->level(k)) > 1e-9)
      fail_at(path, lineno, "level does not match the grid");
    q[k] = parse_double(fields[1], path, lineno);
  }
  try {
    return Measure(std::move(grid), std::move(q));
  } catch (const std::invalid_argument& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_sample_file(const fs::path& path, const SampleSet& s) {
  std::string out;
  for (double v : s.values()) {
    out += format_double(v);
    out += '\n';
  }
  write_file_atomic(path, out);
}

SampleSet read_sample_file(const fs::path& path, double omega_min,
                           double omega_max, bool clamp) {
  const std::vector<std::string> lines = read_lines(path);
  std::vector<double> values;
  values.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    double v = parse_double(lines[i], path, i + 1);
    if (v < omega_min || v > omega_max) {
      if (!clamp) fail_at(path, i + 1, "out of domain");
      v = std::min(std::max(v, omega_min), omega_max);
    }
    values.push_back(v);
  }
  try {
    return SampleSet(std::move(values), omega_min, omega_max);
  } catch (const std::invalid_argument& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

WeightedSamples read_counts_csv(const fs::path& path, double omega_min,
                                double omega_max) {
  const std::vector<std::string> lines = read_lines(path);
  require_header(lines, "age,count", path);
  WeightedSamples out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    if (trim(lines[i]).empty()) continue;
    const auto fields = split_csv_row(lines[i]);
    if (fields.size() != 2) fail_at(path, lineno, "expected 2 fields");
    const std::string age_text = trim(fields[0]);
    char* end = nullptr;
    const double age = std::strtod(age_text.c_str(), &end);
    if (age_text.empty() || end != age_text.c_str() + age_text.size() ||
        !std::isfinite(age))
      fail_at(path, lineno, "invalid age '" + age_text + "'");
    const double count = parse_double(fields[1], path, lineno);
    if (count < 0.0)
      fail_at(path, lineno, "negative count for age '" + age_text + "'");
    if (count == 0.0) continue;
    const double value = age + 0.5;  // midpoint of the one-year bin [age, age+1)
    if (value < omega_min || value > omega_max)
      fail_at(path, lineno, "age '" + age_text + "' out of domain");
    out.values.push_back(value);
    out.weights.push_back(count);
  }
  if (out.values.empty()) throw IoError(path.string() + ": empty sample");
  return out;
}

void write_map_csv(const fs::path& path, const MonotoneMap& t) {
  const Grid& g = t.grid();
  std::string out = "x,value,defined\n";
  for (std::size_t j = 0; j < g.size(); ++j) {
    out += format_double(g.node(j));
    out += ',';
    out += format_double(t.values()[j]);
    out += ',';
    out += t.defined_mask()[j] ? '1' : '0';
    out += '\n';
  }
  write_file_atomic(path, out);
}

MonotoneMap read_map_csv(const fs::path& path, GridPtr grid) {
  const std::vector<std::string> lines = read_lines(path);
  require_header(lines, "x,value,defined", path);
  const std::size_t m = grid->size();
  if (lines.size() != m + 1)
    throw IoError(path.string() + ": expected " + std::to_string(m) +
                  " rows for the grid");
  std::vector<double> z(m);
  std::vector<bool> mask(m);
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t lineno = j + 2;
    const auto fields = split_csv_row(lines[j + 1]);
    if (fields.size() != 3) fail_at(path, lineno, "expected 3 fields");
    const double x = parse_double(fields[0], path, lineno);
    if (std::abs(x - grid->node(j)) > 1e-9)
      fail_at(path, lineno, "node does not match the grid");
    z[j] = parse_double(fields[1], path, lineno);
    const std::string d = trim(fields[2]);
    if (d == "1")
      mask[j] = true;
    else if (d == "0")
      mask[j] = false;
    else
      fail_at(path, lineno, "defined flag must be 0 or 1");
  }
  try {
    return MonotoneMap(std::move(grid), std::move(z), std::move(mask));
  } catch (const std::invalid_argument& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_manifest(const fs::path& path, const DatasetManifest& manifest) {
  json j;
  j["format_version"] = manifest.format_version;
  j["grid"] = {{"omega_min", manifest.omega_min},
               {"omega_max", manifest.omega_max},
               {"m", manifest.m}};
  json entries = json::array();
  for (const ManifestEntry& e : manifest.entries) {
    entries.push_back({{"id", e.id},
                       {"predictor", e.predictor},
                       {"response", e.response},
                       {"kind", e.kind}});
  }
  j["entries"] = std::move(entries);
  write_file_atomic(path, j.dump(2) + "\n");
}

DatasetManifest read_manifest(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("manifest not found: " + path.string());
  const json j = parse_json_file(path);
  DatasetManifest m;
  m.format_version = get_field<int>(j, "format_version", path);
  const json grid = get_field<json>(j, "grid", path);
  m.omega_min = get_field<double>(grid, "omega_min", path);
  m.omega_max = get_field<double>(grid, "omega_max", path);
  m.m = get_field<std::size_t>(grid, "m", path);
  for (const json& e : get_field<json>(j, "entries", path)) {
    ManifestEntry entry;
    entry.id = get_field<std::string>(e, "id", path);
    entry.predictor = get_field<std::string>(e, "predictor", path);
    entry.response = get_field<std::string>(e, "response", path);
    entry.kind = get_field<std::string>(e, "kind", path);
    if (entry.kind != "quantiles" && entry.kind != "samples" &&
        entry.kind != "counts")
      throw IoError(path.string() + ": unknown entry kind '" + entry.kind +
                    "'");
    m.entries.push_back(std::move(entry));
  }
  return m;
}

void write_fit_report(const fs::path& path, const FitReportFile& report) {
  json j;
  j["format_version"] = report.format_version;
  j["tool_version"] = report.tool_version;
  j["config"] = {{"grid",
                  {{"omega_min", report.omega_min},
                   {"omega_max", report.omega_max},
                   {"m", report.m}}},
                 {"bandwidth", report.bandwidth},
                 {"clamp", report.clamp},
                 {"seed", report.seed ? json(*report.seed) : json(nullptr)}};
  const Grid g(report.omega_min, report.omega_max, report.m);
  json xs = json::array(), values = json::array(), defined = json::array();
  for (std::size_t i = 0; i < report.map_values.size(); ++i) {
    xs.push_back(g.node(i));
    values.push_back(report.map_values[i]);
    defined.push_back(static_cast<bool>(report.map_defined[i]));
  }
  j["map"] = {{"x", std::move(xs)},
              {"value", std::move(values)},
              {"defined", std::move(defined)}};
  j["objective"] = report.objective;
  j["per_pair_wd"] = report.per_pair_wd;
  j["validity_statistic"] = report.validity_statistic
                                ? json(*report.validity_statistic)
                                : json(nullptr);
  write_file_atomic(path, j.dump(2) + "\n");
}

FitReportFile read_fit_report(const fs::path& path) {
  if (!fs::exists(path))
    throw IoError("fit report not found: " + path.string());
  const json j = parse_json_file(path);
  FitReportFile r;
  r.format_version = get_field<int>(j, "format_version", path);
  r.tool_version = get_field<std::string>(j, "tool_version", path);
  const json config = get_field<json>(j, "config", path);
  const json grid = get_field<json>(config, "grid", path);
  r.omega_min = get_field<double>(grid, "omega_min", path);
  r.omega_max = get_field<double>(grid, "omega_max", path);
  r.m = get_field<std::size_t>(grid, "m", path);
  r.bandwidth = get_field<std::string>(config, "bandwidth", path);
  r.clamp = get_field<bool>(config, "clamp", path);
  if (config.contains("seed") && !config.at("seed").is_null())
    r.seed = get_field<std::uint64_t>(config, "seed", path);
  const json map = get_field<json>(j, "map", path);
  r.map_values = get_field<std::vector<double>>(map, "value", path);
  r.map_defined = get_field<std::vector<bool>>(map, "defined", path);
  if (r.map_values.size() != r.m || r.map_defined.size() != r.m)
    throw IoError(path.string() + ": map length does not match the grid");
  r.objective = get_field<double>(j, "objective", path);
  r.per_pair_wd = get_field<std::vector<double>>(j, "per_pair_wd", path);
  if (j.contains("validity_statistic") && !j.at("validity_statistic").is_null())
    r.validity_statistic = get_field<double>(j, "validity_statistic", path);
  return r;
}

namespace {

std::string format_svg(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

void write_residual_svg(const fs::path& path, const ResidualSet& r) {
  const Grid& g = r.mean_residual.grid();
  const double lo = g.omega_min(), hi = g.omega_max();
  const double width = 800.0, height = 600.0;
  const double ml = 60.0, mr = 20.0, mt = 20.0, mb = 45.0;
  const auto sx = [&](double v) {
    return ml + (v - lo) / (hi - lo) * (width - ml - mr);
  };
  const auto sy = [&](double v) {
    return height - mb - (v - lo) / (hi - lo) * (height - mt - mb);
  };
  const auto polyline_points = [&](const std::vector<double>& z) {
    std::string pts;
    for (std::size_t j = 0; j < z.size(); ++j) {
      if (j > 0) pts += ' ';
      pts += format_svg(sx(g.node(j)));
      pts += ',';
      pts += format_svg(sy(z[j]));
    }
    return pts;
  };

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" "
         "height=\"600\" viewBox=\"0 0 800 600\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" "
         "fill=\"#ffffff\"/>\n";

  // axes with five ticks each
  out += "<g stroke=\"#000000\" stroke-width=\"1\">\n";
  out += "<line x1=\"" + format_svg(ml) + "\" y1=\"" + format_svg(height - mb) +
         "\" x2=\"" + format_svg(width - mr) + "\" y2=\"" +
         format_svg(height - mb) + "\"/>\n";
  out += "<line x1=\"" + format_svg(ml) + "\" y1=\"" + format_svg(mt) +
         "\" x2=\"" + format_svg(ml) + "\" y2=\"" + format_svg(height - mb) +
         "\"/>\n";
  out += "</g>\n";
  out += "<g font-family=\"monospace\" font-size=\"12\" fill=\"#000000\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = lo + (hi - lo) * static_cast<double>(i) / 4.0;
    out += "<text x=\"" + format_svg(sx(v) - 10.0) + "\" y=\"" +
           format_svg(height - mb + 18.0) + "\">" + format_svg(v) +
           "</text>\n";
    out += "<text x=\"" + format_svg(ml - 50.0) + "\" y=\"" +
           format_svg(sy(v) + 4.0) + "\">" + format_svg(v) + "</text>\n";
  }
  out += "</g>\n";

  // identity reference
  out += "<line x1=\"" + format_svg(sx(lo)) + "\" y1=\"" + format_svg(sy(lo)) +
         "\" x2=\"" + format_svg(sx(hi)) + "\" y2=\"" + format_svg(sy(hi)) +
         "\" stroke=\"#666666\" stroke-width=\"1\" "
         "stroke-dasharray=\"6,4\"/>\n";

  out += "<g fill=\"none\" stroke=\"#4878a8\" stroke-width=\"1\" "
         "stroke-opacity=\"0.35\">\n";
  for (const MonotoneMap& t : r.residual_maps)
    out += "<polyline points=\"" + polyline_points(t.values()) + "\"/>\n";
  out += "</g>\n";
  out += "<polyline points=\"" + polyline_points(r.mean_residual.values()) +
         "\" fill=\"none\" stroke=\"#e07020\" stroke-width=\"2\"/>\n";

  out += "<g font-family=\"monospace\" font-size=\"13\">\n";
  out += "<text x=\"70\" y=\"40\" fill=\"#4878a8\">residual maps</text>\n";
  out += "<text x=\"70\" y=\"58\" fill=\"#e07020\">mean residual</text>\n";
  out += "<text x=\"70\" y=\"76\" fill=\"#666666\">identity</text>\n";
  out += "</g>\n";
  out += "</svg>\n";
  write_file_atomic(path, out);
}

}  // namespace dodreg
