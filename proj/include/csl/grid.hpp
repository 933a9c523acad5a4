#pragma once

// Uniform belief grid on [0,1] and linear interpolation of grid-aligned data.
// Odd point counts keep 0, 1/2, and 1 on the grid, which the structural
// checks (symmetry folds, endpoint values) rely on.

#include <Eigen/Core>
#include <algorithm>
#include <stdexcept>

namespace csl {

class BeliefGrid {
 public:
  static BeliefGrid uniform(int n) {
    if (n < 3 || n % 2 == 0)
      throw std::invalid_argument("BeliefGrid: point count must be odd and >= 3");
    BeliefGrid g;
    g.points_.resize(n);
    for (int i = 0; i < n; ++i) g.points_[i] = static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
  }

  int size() const noexcept { return static_cast<int>(points_.size()); }
  double spacing() const noexcept { return 1.0 / static_cast<double>(size() - 1); }
  double operator[](int i) const { return points_[i]; }
  const Eigen::ArrayXd& points() const noexcept { return points_; }

  // Cell index and weight for b, so that f(b) ~ (1-w) f[i] + w f[i+1].
  struct Cell {
    int i;
    double w;
  };
  Cell locate(double b) const noexcept {
    const double t = std::clamp(b, 0.0, 1.0) * static_cast<double>(size() - 1);
    int i = std::min(static_cast<int>(t), size() - 2);
    return {i, t - static_cast<double>(i)};
  }

  double interpolate(const Eigen::ArrayXd& values, double b) const {
    const Cell c = locate(b);
    return (1.0 - c.w) * values[c.i] + c.w * values[c.i + 1];
  }

 private:
  BeliefGrid() = default;
  Eigen::ArrayXd points_;
};

}  // namespace csl
