#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "dodreg/grid.hpp"
#include "dodreg/measure.hpp"
#include "dodreg/rng.hpp"

namespace testutil {

// Closed-form CDFs used as independent references for the grid-based code.
inline double beta22_cdf(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return 3.0 * x * x - 2.0 * x * x * x;
}

inline double beta22_pdf(double x) { return (x < 0.0 || x > 1.0) ? 0.0 : 6.0 * x * (1.0 - x); }

inline double beta25_cdf(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double om = 1.0 - x;
    const double om2 = om * om;
    return 1.0 - om2 * om2 * om * (1.0 + 5.0 * x);
}

inline double beta25_pdf(double x) {
    if (x < 0.0 || x > 1.0) return 0.0;
    const double om = 1.0 - x;
    const double om2 = om * om;
    return 30.0 * x * om2 * om2;
}

// Invert a continuous nondecreasing function on [lo, hi] by bisection.
inline double invert_monotone(const std::function<double(double)>& f, double target, double lo,
                              double hi, int iters = 80) {
    double a = lo, b = hi;
    for (int i = 0; i < iters; ++i) {
        const double mid = 0.5 * (a + b);
        if (f(mid) < target)
            a = mid;
        else
            b = mid;
    }
    return 0.5 * (a + b);
}

// L2 distance between two quantile functions via composite Simpson on p in (0,1),
// independent of the cell-based distance under test.
inline double quadrature_wasserstein(const std::function<double(double)>& qa,
                                     const std::function<double(double)>& qb,
                                     std::size_t panels = 20000) {
    const double h = 1.0 / static_cast<double>(panels);
    auto g = [&](double p) {
        const double d = qa(p) - qb(p);
        return d * d;
    };
    double acc = 0.0;
    for (std::size_t i = 0; i < panels; ++i) {
        const double p0 = static_cast<double>(i) * h;
        const double p1 = p0 + h;
        acc += (g(p0) + 4.0 * g(0.5 * (p0 + p1)) + g(p1)) * h / 6.0;
    }
    return std::sqrt(acc);
}

// A random measure on the grid: sorted uniform draws inside the domain.
inline dodreg::Measure random_measure(dodreg::RngStream& rng, const dodreg::GridPtr& grid) {
    std::vector<double> q(grid->size());
    for (auto& v : q) v = rng.uniform(grid->omega_min(), grid->omega_max());
    std::sort(q.begin(), q.end());
    return dodreg::Measure(grid, std::move(q));
}

// A random absolutely continuous measure: strictly increasing quantile vector.
inline dodreg::Measure random_smooth_measure(dodreg::RngStream& rng, const dodreg::GridPtr& grid) {
    const std::size_t m = grid->size();
    std::vector<double> gaps(m + 1);
    double total = 0.0;
    for (auto& g : gaps) {
        g = 0.05 + rng.uniform();
        total += g;
    }
    const double width = grid->omega_max() - grid->omega_min();
    std::vector<double> q(m);
    double acc = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        acc += gaps[k];
        q[k] = grid->omega_min() + width * acc / total;
    }
    return dodreg::Measure(grid, std::move(q));
}

// Build a measure from an analytic density by sampling it at the grid nodes.
inline dodreg::Measure measure_from_pdf(const dodreg::GridPtr& grid,
                                        const std::function<double(double)>& pdf) {
    std::vector<double> f(grid->size());
    double mass = 0.0;
    for (std::size_t j = 0; j < grid->size(); ++j) {
        f[j] = pdf(grid->node(j));
        mass += f[j] * grid->cell_width();
    }
    for (auto& v : f) v /= mass;
    return dodreg::density_to_measure(dodreg::DensityCurve(grid, std::move(f)));
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

}  // namespace testutil
