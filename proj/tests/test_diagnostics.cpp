#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "dodreg/diagnostics.hpp"
#include "dodreg/estimator.hpp"
#include "dodreg/measure.hpp"
#include "dodreg/rng.hpp"
#include "dodreg/simulation.hpp"
#include "dodreg/transport.hpp"
#include "helpers.hpp"

using namespace dodreg;
using namespace testutil;

namespace {

Measure node_aligned_uniform(const GridPtr& grid, std::size_t j_lo, std::size_t j_hi,
                             double shift = 0.0) {
    const double a = grid->node(j_lo) + shift;
    const double b = grid->node(j_hi) + shift;
    std::vector<double> q(grid->size());
    for (std::size_t k = 0; k < q.size(); ++k) q[k] = a + (b - a) * grid->level(k);
    return Measure(grid, std::move(q));
}

RegressionDataset random_dataset(RngStream& rng, const GridPtr& grid, int n) {
    std::vector<RegressionPair> pairs;
    for (int i = 0; i < n; ++i)
        pairs.push_back({random_smooth_measure(rng, grid), random_smooth_measure(rng, grid), {}, {}});
    return RegressionDataset(std::move(pairs));
}

}  // namespace

TEST_CASE("residual of a perfectly fitted pair is the identity on the support") {
    RngStream rng(81);
    auto grid = make_grid(0.0, 1.0, 200);
    Measure mu = random_smooth_measure(rng, grid);
    RegressionDataset d({RegressionPair{mu, mu, {}, {}}});
    ResidualSet r = residuals(fit(d), d);
    REQUIRE(r.residual_maps.size() == 1);
    const Measure& nu = d.pairs()[0].response;
    const double lo = nu.quantile(0.0), hi = nu.quantile(1.0);
    for (std::size_t j = 0; j < grid->size(); ++j) {
        const double x = grid->node(j);
        if (r.residual_maps[0].defined_mask()[j] && x >= lo + 0.01 && x <= hi - 0.01)
            CHECK(r.residual_maps[0].values()[j] == doctest::Approx(x).epsilon(1e-6));
    }
}

TEST_CASE("opposite shifts leave a mean residual at the identity") {
    // Both pairs share the predictor; the responses sit at +/- 0.1 around it.
    // The fitted map is then the identity on the covered region, and the two
    // residual maps are x -> x + 0.1 and x -> x - 0.1, averaging back to the
    // identity.
    auto grid = make_grid(0.0, 2.0, 500);
    Measure mu = node_aligned_uniform(grid, 125, 249);
    Measure hi = node_aligned_uniform(grid, 125, 249, 0.1);
    Measure lo = node_aligned_uniform(grid, 125, 249, -0.1);
    RegressionDataset d({RegressionPair{mu, hi, {}, {}}, RegressionPair{mu, lo, {}, {}}});
    FitResult f = fit(d);
    ResidualSet r = residuals(f, d);

    // Check on nodes covered by the *response* supports.
    for (std::size_t j = 0; j < grid->size(); ++j) {
        const double x = grid->node(j);
        if (x < 0.61 || x > 0.89) continue;
        CHECK(r.residual_maps[0].values()[j] == doctest::Approx(x + 0.1).epsilon(1e-9));
        CHECK(r.residual_maps[1].values()[j] == doctest::Approx(x - 0.1).epsilon(1e-9));
        CHECK(r.mean_residual.values()[j] == doctest::Approx(x).epsilon(1e-9));
    }
    CHECK(r.per_pair_wd[0] == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(r.per_pair_wd[1] == doctest::Approx(0.1).epsilon(1e-9));
}

TEST_CASE("mean residual is the arithmetic mean of the residual maps") {
    RngStream rng(82);
    auto grid = make_grid(0.0, 1.0, 120);
    RegressionDataset d = random_dataset(rng, grid, 7);
    ResidualSet r = residuals(fit(d), d);
    REQUIRE(r.residual_maps.size() == 7);
    for (std::size_t j = 0; j < grid->size(); ++j) {
        double want = 0.0;
        for (const auto& t : r.residual_maps) want += t.values()[j] / 7.0;
        CHECK(r.mean_residual.values()[j] == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("residual distances match the stored per-pair quality") {
    RngStream rng(83);
    auto grid = make_grid(0.0, 1.0, 100);
    RegressionDataset d = random_dataset(rng, grid, 5);
    FitResult f = fit(d);
    ResidualSet r = residuals(f, d);
    for (std::size_t i = 0; i < d.size(); ++i)
        CHECK(r.per_pair_wd[i] == doctest::Approx(f.per_pair_wd[i]).epsilon(1e-12));
}

TEST_CASE("degenerate fitted responses are reported") {
    auto grid = make_grid(0.0, 1.0, 50);
    RngStream rng(84);
    Measure mu = random_smooth_measure(rng, grid);
    RegressionDataset d({RegressionPair{mu, mu, {}, {}}});
    // Force a constant fitted map; pushing the predictor through it yields a
    // point mass with no transport map to the observed response.
    FitResult broken{MonotoneMap(grid, std::vector<double>(50, 0.5)),
                     0.0,
                     {0.0},
                     std::vector<bool>(50, true),
                     node_weights_of(mu)};
    CHECK_THROWS_WITH_AS(residuals(broken, d), "degenerate fitted response", std::invalid_argument);
}

TEST_CASE("residuals require matching grids") {
    auto g1 = make_grid(0.0, 1.0, 40);
    auto g2 = make_grid(0.0, 1.0, 60);
    RngStream rng(85);
    Measure mu1 = random_smooth_measure(rng, g1);
    RegressionDataset d1({RegressionPair{mu1, mu1, {}, {}}});
    Measure mu2 = random_smooth_measure(rng, g2);
    RegressionDataset d2({RegressionPair{mu2, mu2, {}, {}}});
    FitResult f = fit(d1);
    CHECK_THROWS_WITH_AS(residuals(f, d2), "grid mismatch", std::invalid_argument);
}

TEST_CASE("error to a known truth detects exact recovery and offsets") {
    auto grid = make_grid(0.0, 1.0, 300);
    // Truth with room above it: t0(x) = 0.8 x.
    std::vector<double> tv(grid->size());
    for (std::size_t j = 0; j < grid->size(); ++j) tv[j] = 0.8 * grid->node(j);
    MonotoneMap t0(grid, tv);
    NodeWeights qn(grid, std::vector<double>(300, 1.0 / 300.0));
    FitResult exact{t0, 0.0, {}, std::vector<bool>(300, true), qn};
    CHECK(error_to_truth(exact, t0) == 0.0);

    std::vector<double> off(tv);
    for (auto& v : off) v += 0.1;
    FitResult offset{MonotoneMap(grid, off), 0.0, {}, std::vector<bool>(300, true), qn};
    CHECK(error_to_truth(offset, t0) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("goodness of fit ranks the worst pairs first") {
    RngStream rng(86);
    auto grid = make_grid(0.0, 1.0, 80);
    RegressionDataset d = random_dataset(rng, grid, 6);
    FitResult f = fit(d);
    GoodnessOfFit g = goodness_of_fit_report(f, d);
    REQUIRE(g.worst_pairs.size() == 6);
    for (std::size_t i = 1; i < g.worst_pairs.size(); ++i)
        CHECK(g.worst_pairs[i - 1].second >= g.worst_pairs[i].second);
    // Same multiset of distances as the fit stored, just reordered.
    std::vector<double> got, want(f.per_pair_wd);
    for (const auto& [idx, wd] : g.worst_pairs) {
        CHECK(wd == doctest::Approx(f.per_pair_wd[idx]).epsilon(1e-12));
        got.push_back(wd);
    }
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    for (std::size_t i = 0; i < got.size(); ++i)
        CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
}

TEST_CASE("validity statistic is small for data drawn from the model") {
    auto grid = make_grid(0.0, 1.0, 500);
    MonotoneMap truth = zeta_map(4, grid);
    SyntheticDataset data = generate_dataset(87, 40, truth, BetaMixtureSpec{}, NoiseSpec{}, {});
    FitResult f = fit(data.dataset);
    GoodnessOfFit g = goodness_of_fit_report(f, data.dataset);
    CHECK(g.validity_statistic >= 0.0);
    CHECK(g.validity_statistic <= 0.02);
}

TEST_CASE("validity statistic flags a misspecified model") {
    // Drive one response far from anything a single monotone map of the
    // predictors can produce while keeping the rest near the identity: the
    // mean residual is pulled away from the identity.
    auto grid = make_grid(0.0, 1.0, 200);
    Measure a = node_aligned_uniform(grid, 20, 80);
    Measure b = node_aligned_uniform(grid, 120, 180);
    // Same predictor twice with responses at opposite ends.
    RegressionDataset d({RegressionPair{a, a, {}, {}}, RegressionPair{a, b, {}, {}}});
    FitResult f = fit(d);
    GoodnessOfFit g = goodness_of_fit_report(f, d);
    CHECK(g.validity_statistic >= 0.05);
}

TEST_CASE("convergence study produces the full deterministic table") {
    auto grid = make_grid(0.0, 1.0, 100);
    ConvergenceConfig cfg(zeta_map(4, grid));
    cfg.N_values = {5, 10};
    cfg.replications = 3;
    cfg.seed = 88;
    cfg.noise = NoiseSpec{};
    ConvergenceTable t1 = convergence_study(cfg);
    ConvergenceTable t2 = convergence_study(cfg);
    REQUIRE(t1.rows.size() == 6);
    REQUIRE(t1.medians.size() == 2);
    for (std::size_t i = 0; i < t1.rows.size(); ++i) {
        CHECK(t1.rows[i].error == t2.rows[i].error);
        CHECK(t1.rows[i].error >= 0.0);
    }
    REQUIRE(t1.slope.has_value());
    CHECK(*t1.slope == *t2.slope);
    // Rows are ordered by (n, N, replication) and medians by (n, N).
    CHECK(t1.rows[0].N == 5);
    CHECK(t1.rows[3].N == 10);
    CHECK(t1.medians[0].N == 5);
    CHECK(t1.medians[1].N == 10);
    // The median of three replications is one of the observed errors.
    std::vector<double> cell{t1.rows[0].error, t1.rows[1].error, t1.rows[2].error};
    std::sort(cell.begin(), cell.end());
    CHECK(t1.medians[0].median_error == doctest::Approx(cell[1]).epsilon(1e-15));
}

TEST_CASE("convergence study handles sampled observations and mixed columns") {
    auto grid = make_grid(0.0, 1.0, 60);
    ConvergenceConfig cfg(zeta_map(2, grid));
    cfg.N_values = {4};
    cfg.replications = 2;
    cfg.seed = 89;
    cfg.n_values = {std::nullopt, 50};
    ConvergenceTable t = convergence_study(cfg);
    REQUIRE(t.rows.size() == 4);
    CHECK(!t.rows[0].n.has_value());
    CHECK(t.rows[2].n == 50);
    REQUIRE(t.medians.size() == 2);
    // A single N value cannot support a slope estimate.
    CHECK(!t.slope.has_value());
    for (const auto& row : t.rows) CHECK(row.wall_seconds >= 0.0);
}

TEST_CASE("convergence error shrinks with more data") {
    auto grid = make_grid(0.0, 1.0, 200);
    ConvergenceConfig cfg(zeta_map(4, grid));
    cfg.N_values = {8, 64};
    cfg.replications = 10;
    cfg.seed = 90;
    ConvergenceTable t = convergence_study(cfg);
    REQUIRE(t.medians.size() == 2);
    CHECK(t.medians[1].median_error < t.medians[0].median_error);
    REQUIRE(t.slope.has_value());
    CHECK(*t.slope < 0.0);
}

TEST_CASE("convergence study validates its configuration") {
    auto grid = make_grid(0.0, 1.0, 50);
    ConvergenceConfig no_n(zeta_map(1, grid));
    no_n.N_values = {};
    CHECK_THROWS_AS(convergence_study(no_n), std::invalid_argument);

    ConvergenceConfig bad_n(zeta_map(1, grid));
    bad_n.N_values = {5};
    bad_n.n_values = {1};
    CHECK_THROWS_AS(convergence_study(bad_n), std::invalid_argument);

    ConvergenceConfig bad_reps(zeta_map(1, grid));
    bad_reps.N_values = {5};
    bad_reps.replications = 0;
    CHECK_THROWS_AS(convergence_study(bad_reps), std::invalid_argument);

    ConvergenceConfig bad_N(zeta_map(1, grid));
    bad_N.N_values = {0};
    CHECK_THROWS_AS(convergence_study(bad_N), std::invalid_argument);
}
