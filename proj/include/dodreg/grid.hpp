#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <vector>

namespace dodreg {

/// Equal-width discretization of a compact interval Omega = [omega_min,
/// omega_max] into m cells. Domain nodes sit at cell midpoints and
/// probability levels at (k + 1/2)/m, so a quantile vector, a density
/// vector and a map-value vector all have length m and refer to the same
/// partition.
class Grid {
 public:
  Grid(double omega_min, double omega_max, std::size_t m)
      : lo_(omega_min), hi_(omega_max), m_(m) {
    if (!(std::isfinite(lo_) && std::isfinite(hi_)) || !(lo_ < hi_))
      throw std::invalid_argument("grid: omega_min must be < omega_max");
    if (m_ < 2) throw std::invalid_argument("grid: need at least 2 cells");
    h_ = (hi_ - lo_) / static_cast<double>(m_);
  }

  double omega_min() const { return lo_; }
  double omega_max() const { return hi_; }
  std::size_t size() const { return m_; }
  double cell_width() const { return h_; }

  /// Midpoint of cell j, j in [0, m).
  double node(std::size_t j) const {
    return lo_ + (static_cast<double>(j) + 0.5) * h_;
  }

  /// Probability level (k + 1/2)/m, k in [0, m).
  double level(std::size_t k) const {
    return (static_cast<double>(k) + 0.5) / static_cast<double>(m_);
  }

  /// Cell boundary j, j in [0, m]; edge(0) == omega_min, edge(m) == omega_max.
  double edge(std::size_t j) const {
    if (j == 0) return lo_;
    if (j == m_) return hi_;
    return lo_ + static_cast<double>(j) * h_;
  }

  std::vector<double> nodes() const {
    std::vector<double> x(m_);
    for (std::size_t j = 0; j < m_; ++j) x[j] = node(j);
    return x;
  }

  std::vector<double> levels() const {
    std::vector<double> p(m_);
    for (std::size_t k = 0; k < m_; ++k) p[k] = level(k);
    return p;
  }

  bool contains(double x) const { return x >= lo_ && x <= hi_; }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.lo_ == b.lo_ && a.hi_ == b.hi_ && a.m_ == b.m_;
  }
  friend bool operator!=(const Grid& a, const Grid& b) { return !(a == b); }

 private:
  double lo_;
  double hi_;
  std::size_t m_;
  double h_;
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr make_grid(double omega_min, double omega_max, std::size_t m) {
  return std::make_shared<const Grid>(omega_min, omega_max, m);
}

inline void require_same_grid(const Grid& a, const Grid& b) {
  if (a != b) throw std::invalid_argument("grid mismatch");
}

}  // namespace dodreg
