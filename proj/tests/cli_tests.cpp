#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "dodreg/diagnostics.hpp"
#include "dodreg/estimator.hpp"
#include "dodreg/io.hpp"
#include "dodreg/measure.hpp"
#include "dodreg/simulation.hpp"
#include "dodreg/transport.hpp"

using namespace dodreg;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code;
    std::string output;  // stdout and stderr combined
};

RunResult run_cli(const std::string& args, const fs::path& scratch) {
    const fs::path log = scratch / "last_run.log";
    const std::string cmd =
        std::string(CLI_BIN) + " " + args + " > " + log.string() + " 2>&1";
    const int raw = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WEXITSTATUS(raw);
    std::ifstream in(log, std::ios::binary);
    r.output.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    fs::remove(log);
    return r;
}

struct Scratch {
    fs::path dir;
    explicit Scratch(const std::string& name)
        : dir(fs::temp_directory_path() / ("dodreg_cli_" + name)) {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    std::string sub(const std::string& leaf) const { return (dir / leaf).string(); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void spit(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << text;
}

// Relative path -> file bytes for every regular file below root.
std::map<std::string, std::string> snapshot(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(root))
        if (entry.is_regular_file())
            files[fs::relative(entry.path(), root).string()] = slurp(entry.path());
    return files;
}

}  // namespace

TEST_CASE("cli: no arguments prints usage and succeeds") {
    Scratch sc("usage");
    RunResult r = run_cli("", sc.dir);
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("Usage") != std::string::npos);
    CHECK(r.output.find("simulate") != std::string::npos);

    RunResult help = run_cli("--help", sc.dir);
    CHECK(help.exit_code == 0);
    RunResult sub_help = run_cli("fit --help", sc.dir);
    CHECK(sub_help.exit_code == 0);
    CHECK(sub_help.output.find("--bandwidth") != std::string::npos);
}

TEST_CASE("cli: unknown flags and subcommands exit with usage errors") {
    Scratch sc("unknown");
    CHECK(run_cli("frobnicate", sc.dir).exit_code == 2);
    CHECK(run_cli("simulate --bogus 3", sc.dir).exit_code == 2);
    // Missing required options.
    CHECK(run_cli("simulate --N 3", sc.dir).exit_code == 2);
    CHECK(run_cli("fit --out x.json", sc.dir).exit_code == 2);
}

TEST_CASE("cli: simulate writes a readable dataset with the stated truth") {
    Scratch sc("simulate");
    RunResult r = run_cli("simulate --N 4 --m 64 --seed 9 --t0 zeta:4 --out " + sc.sub("sim"), sc.dir);
    REQUIRE(r.exit_code == 0);

    DatasetManifest man = read_manifest(sc.dir / "sim" / "manifest.json");
    CHECK(man.m == 64);
    CHECK(man.omega_min == 0.0);
    CHECK(man.omega_max == 1.0);
    REQUIRE(man.entries.size() == 4);
    CHECK(man.entries[0].kind == "quantiles");

    auto grid = make_grid(0.0, 1.0, 64);
    MonotoneMap truth = read_map_csv(sc.dir / "sim" / "true_map.csv", grid);
    for (std::size_t j = 0; j < 64; ++j)
        CHECK(truth.values()[j] == doctest::Approx(zeta(4, grid->node(j))).epsilon(1e-12));

    // Files named by the manifest exist and parse; responses obey the model.
    SyntheticDataset want = generate_dataset(9, 4, truth, BetaMixtureSpec{}, NoiseSpec{}, {});
    for (std::size_t i = 0; i < man.entries.size(); ++i) {
        Measure p = read_quantile_csv(sc.dir / "sim" / man.entries[i].predictor, grid);
        Measure q = read_quantile_csv(sc.dir / "sim" / man.entries[i].response, grid);
        CHECK(p.quantiles() == want.dataset.pairs()[i].predictor.quantiles());
        CHECK(q.quantiles() == want.dataset.pairs()[i].response.quantiles());
    }
    CHECK(fs::exists(sc.dir / "sim" / "noise_map_0003.csv"));
}

TEST_CASE("cli: simulate is byte-deterministic across runs and directories") {
    Scratch sc("determinism");
    REQUIRE(run_cli("simulate --N 3 --m 40 --seed 5 --out " + sc.sub("a"), sc.dir).exit_code == 0);
    REQUIRE(run_cli("simulate --N 3 --m 40 --seed 5 --out " + sc.sub("b"), sc.dir).exit_code == 0);
    auto a = snapshot(sc.dir / "a");
    auto b = snapshot(sc.dir / "b");
    REQUIRE(!a.empty());
    CHECK(a == b);

    // A different seed changes the data.
    REQUIRE(run_cli("simulate --N 3 --m 40 --seed 6 --out " + sc.sub("c"), sc.dir).exit_code == 0);
    CHECK(snapshot(sc.dir / "c") != a);
}

TEST_CASE("cli: simulate with sampled observations writes sample files") {
    Scratch sc("samples");
    RunResult r = run_cli("simulate --N 3 --m 50 --seed 4 --n 25 --out " + sc.sub("sim"), sc.dir);
    REQUIRE(r.exit_code == 0);
    DatasetManifest man = read_manifest(sc.dir / "sim" / "manifest.json");
    CHECK(man.entries[0].kind == "samples");
    SampleSet s = read_sample_file(sc.dir / "sim" / man.entries[0].predictor, 0.0, 1.0, false);
    CHECK(s.size() == 25);
}

TEST_CASE("cli: fit recovers a noiseless truth and reports faithfully") {
    Scratch sc("fit");
    REQUIRE(run_cli("simulate --N 6 --m 200 --seed 11 --t0 zeta:4 --k-max 0 --out " + sc.sub("sim"),
                    sc.dir)
                .exit_code == 0);
    RunResult r = run_cli("fit --data " + sc.sub("sim/manifest.json") + " --out " + sc.sub("fit.json"),
                          sc.dir);
    REQUIRE(r.exit_code == 0);

    FitReportFile rep = read_fit_report(sc.dir / "fit.json");
    CHECK(rep.tool_version == kToolVersion);
    CHECK(rep.m == 200);
    CHECK(rep.objective <= 1e-4);
    CHECK(rep.per_pair_wd.size() == 6);
    REQUIRE(rep.validity_statistic.has_value());
    CHECK(*rep.validity_statistic <= 2e-2);

    auto grid = make_grid(0.0, 1.0, 200);
    MonotoneMap truth = read_map_csv(sc.dir / "sim" / "true_map.csv", grid);
    double worst = 0.0;
    for (std::size_t j = 0; j < 200; ++j)
        if (rep.map_defined[j])
            worst = std::max(worst, std::abs(rep.map_values[j] - truth.values()[j]));
    CHECK(worst <= 2e-2);
}

TEST_CASE("cli: fit error paths use exit code 2 with the pinned messages") {
    Scratch sc("fit_err");
    RunResult missing = run_cli("fit --data " + sc.sub("nope/manifest.json") + " --out " +
                                    sc.sub("fit.json"),
                                sc.dir);
    CHECK(missing.exit_code == 2);
    CHECK(missing.output.find("manifest not found") != std::string::npos);

    REQUIRE(run_cli("simulate --N 2 --m 30 --seed 3 --out " + sc.sub("sim"), sc.dir).exit_code == 0);
    RunResult bad_bw = run_cli("fit --data " + sc.sub("sim/manifest.json") +
                                   " --bandwidth 0 --out " + sc.sub("fit.json"),
                               sc.dir);
    CHECK(bad_bw.exit_code == 2);
    CHECK(bad_bw.output.find("bandwidth must be positive") != std::string::npos);

    RunResult bad_bw2 = run_cli("fit --data " + sc.sub("sim/manifest.json") +
                                    " --bandwidth pancake --out " + sc.sub("fit.json"),
                                sc.dir);
    CHECK(bad_bw2.exit_code == 2);

    // Malformed quantile file: the message carries file and line.
    {
        std::string text = "p,value\n";
        for (std::size_t k = 0; k < 30; ++k) {
            const double p = (k + 0.5) / 30.0;
            text += format_double(p) + "," + (k == 1 ? "oops" : format_double(p)) + "\n";
        }
        spit(sc.dir / "sim" / "predictor_0001.csv", text);
    }
    RunResult bad_file = run_cli("fit --data " + sc.sub("sim/manifest.json") + " --out " +
                                     sc.sub("fit.json"),
                                 sc.dir);
    CHECK(bad_file.exit_code == 2);
    CHECK(bad_file.output.find("predictor_0001.csv:3:") != std::string::npos);
}

TEST_CASE("cli: predict pushes quantile files through a stored map") {
    Scratch sc("predict");
    // A hand-built report whose map is the identity: output equals input.
    auto grid = make_grid(0.0, 1.0, 50);
    FitReportFile rep;
    rep.tool_version = kToolVersion;
    rep.omega_min = 0.0;
    rep.omega_max = 1.0;
    rep.m = 50;
    rep.map_values = identity_map(grid).values();
    rep.map_defined.assign(50, true);
    write_fit_report(sc.dir / "fit.json", rep);

    Measure input(grid, [&] {
        std::vector<double> q(50);
        for (std::size_t k = 0; k < 50; ++k) q[k] = 0.1 + 0.8 * grid->level(k);
        return q;
    }());
    write_quantile_csv(sc.dir / "in.csv", input);

    RunResult r = run_cli("predict --fit " + sc.sub("fit.json") + " --input " + sc.sub("in.csv") +
                              " --out " + sc.sub("out.csv"),
                          sc.dir);
    REQUIRE(r.exit_code == 0);
    Measure out = read_quantile_csv(sc.dir / "out.csv", grid);
    for (std::size_t k = 0; k < 50; ++k)
        CHECK(out.quantiles()[k] == doctest::Approx(input.quantiles()[k]).epsilon(1e-12));

    spit(sc.dir / "junk.csv", "p,value\n0.5,0.5\n");
    CHECK(run_cli("predict --fit " + sc.sub("fit.json") + " --input " + sc.sub("junk.csv") +
                      " --out " + sc.sub("out2.csv"),
                  sc.dir)
              .exit_code == 2);
}

TEST_CASE("cli: residuals reproduce the library diagnostics") {
    Scratch sc("residuals");
    REQUIRE(run_cli("simulate --N 5 --m 100 --seed 13 --out " + sc.sub("sim"), sc.dir).exit_code == 0);
    REQUIRE(run_cli("fit --data " + sc.sub("sim/manifest.json") + " --out " + sc.sub("fit.json"),
                    sc.dir)
                .exit_code == 0);
    RunResult r = run_cli("residuals --fit " + sc.sub("fit.json") + " --data " +
                              sc.sub("sim/manifest.json") + " --out-dir " + sc.sub("res"),
                          sc.dir);
    REQUIRE(r.exit_code == 0);

    for (const char* leaf : {"residual_0000.csv", "residual_0004.csv", "mean_residual.csv",
                             "residuals.svg", "summary.json"})
        CHECK(fs::exists(sc.dir / "res" / leaf));

    // Recompute everything through the library and compare the mean residual.
    auto grid = make_grid(0.0, 1.0, 100);
    MonotoneMap truth = zeta_map(4, grid);
    SyntheticDataset data = generate_dataset(13, 5, truth, BetaMixtureSpec{}, NoiseSpec{}, {});
    FitResult f = fit(data.dataset);
    ResidualSet want = residuals(f, data.dataset);
    MonotoneMap got = read_map_csv(sc.dir / "res" / "mean_residual.csv", grid);
    for (std::size_t j = 0; j < 100; ++j)
        CHECK(got.values()[j] == doctest::Approx(want.mean_residual.values()[j]).epsilon(1e-12));

    const std::string summary = slurp(sc.dir / "res" / "summary.json");
    CHECK(summary.find("validity_statistic") != std::string::npos);
    CHECK(summary.find("worst_pairs") != std::string::npos);

    // Mismatched fit and data are rejected.
    REQUIRE(run_cli("simulate --N 2 --m 64 --seed 14 --out " + sc.sub("sim2"), sc.dir).exit_code == 0);
    RunResult mismatch = run_cli("residuals --fit " + sc.sub("fit.json") + " --data " +
                                     sc.sub("sim2/manifest.json") + " --out-dir " + sc.sub("res2"),
                                 sc.dir);
    CHECK(mismatch.exit_code == 2);
    CHECK(mismatch.output.find("grid mismatch") != std::string::npos);
}

TEST_CASE("cli: convergence study writes the table and summary") {
    Scratch sc("convergence");
    RunResult r = run_cli(
        "convergence --N-list 4,8 --n-list full,30 --reps 2 --m 50 --seed 17 --t0 zeta:2 --out " +
            sc.sub("conv"),
        sc.dir);
    REQUIRE(r.exit_code == 0);

    const std::string table = slurp(sc.dir / "conv" / "table.csv");
    REQUIRE(table.rfind("n,N,replication,error\n", 0) == 0);
    std::size_t lines = std::count(table.begin(), table.end(), '\n');
    CHECK(lines == 1 + 2 * 2 * 2);
    CHECK(table.find("full,4,0,") != std::string::npos);
    CHECK(table.find("30,8,1,") != std::string::npos);

    const std::string summary = slurp(sc.dir / "conv" / "summary.json");
    CHECK(summary.find("\"slope\"") != std::string::npos);
    CHECK(summary.find("\"cells\"") != std::string::npos);
    CHECK(summary.find("\"median_error\"") != std::string::npos);
}

TEST_CASE("cli: ingest-counts smooths a count table into quantiles") {
    Scratch sc("ingest");
    spit(sc.dir / "counts.csv", "age,count\n60,10\n61,30\n62,40\n63,15\n64,5\n");
    RunResult r = run_cli("ingest-counts --counts " + sc.sub("counts.csv") +
                              " --omega 0,110 --m 220 --out " + sc.sub("q.csv"),
                          sc.dir);
    REQUIRE(r.exit_code == 0);
    Measure mu = read_quantile_csv(sc.dir / "q.csv", make_grid(0.0, 110.0, 220));
    // The mass sits around age 62.
    CHECK(mu.quantile(0.5) > 58.0);
    CHECK(mu.quantile(0.5) < 66.0);
    CHECK(mu.is_absolutely_continuous());

    // Doubling every count at a fixed bandwidth changes nothing.
    spit(sc.dir / "double.csv", "age,count\n60,20\n61,60\n62,80\n63,30\n64,10\n");
    REQUIRE(run_cli("ingest-counts --counts " + sc.sub("counts.csv") +
                        " --omega 0,110 --m 220 --bandwidth 2.5 --out " + sc.sub("qa.csv"),
                    sc.dir)
                .exit_code == 0);
    REQUIRE(run_cli("ingest-counts --counts " + sc.sub("double.csv") +
                        " --omega 0,110 --m 220 --bandwidth 2.5 --out " + sc.sub("qb.csv"),
                    sc.dir)
                .exit_code == 0);
    CHECK(slurp(sc.dir / "qa.csv") == slurp(sc.dir / "qb.csv"));

    // Open-ended age bands are rejected with the offending row named.
    spit(sc.dir / "open.csv", "age,count\n109,5\n110+,3\n");
    RunResult open = run_cli("ingest-counts --counts " + sc.sub("open.csv") +
                                 " --omega 0,110 --m 220 --out " + sc.sub("qo.csv"),
                             sc.dir);
    CHECK(open.exit_code == 2);
    CHECK(open.output.find("110+") != std::string::npos);
}

TEST_CASE("cli: ingest-counts pair mode feeds straight into fit") {
    Scratch sc("ingest_pairs");
    spit(sc.dir / "p0.csv", "age,count\n50,10\n51,20\n52,10\n");
    spit(sc.dir / "r0.csv", "age,count\n60,10\n61,20\n62,10\n");
    spit(sc.dir / "p1.csv", "age,count\n55,5\n56,15\n57,5\n");
    spit(sc.dir / "r1.csv", "age,count\n65,5\n66,15\n67,5\n");
    RunResult r = run_cli("ingest-counts --pair y0," + sc.sub("p0.csv") + "," + sc.sub("r0.csv") +
                              " --pair y1," + sc.sub("p1.csv") + "," + sc.sub("r1.csv") +
                              " --omega 0,110 --m 110 --out-dir " + sc.sub("data"),
                          sc.dir);
    REQUIRE(r.exit_code == 0);
    DatasetManifest man = read_manifest(sc.dir / "data" / "manifest.json");
    REQUIRE(man.entries.size() == 2);
    CHECK(man.entries[0].id == "y0");
    CHECK(man.entries[0].kind == "quantiles");

    RunResult fit_run = run_cli("fit --data " + sc.sub("data/manifest.json") + " --out " +
                                    sc.sub("fit.json"),
                                sc.dir);
    REQUIRE(fit_run.exit_code == 0);
    FitReportFile rep = read_fit_report(sc.dir / "fit.json");
    // Both pairs shift mass upward by about 10 years of age.
    auto grid = make_grid(0.0, 110.0, 110);
    double shift_at_52 = 0.0;
    for (std::size_t j = 0; j < 110; ++j)
        if (rep.map_defined[j] && std::abs(grid->node(j) - 52.0) < 1.0)
            shift_at_52 = rep.map_values[j] - grid->node(j);
    CHECK(shift_at_52 == doctest::Approx(10.0).epsilon(0.1));
}
