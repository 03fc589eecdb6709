#pragma once

#include <functional>
#include <vector>

#include "poischan/rng.hpp"

namespace poischan::point_process {

// Uniform partition of [0, horizon] into `cells` cells of width dt.
class TimeGrid {
public:
  TimeGrid(double horizon, int cells);

  double horizon() const { return horizon_; }
  int cells() const { return cells_; }
  double dt() const { return dt_; }
  double left(int j) const { return dt_ * static_cast<double>(j); }
  double right(int j) const { return dt_ * static_cast<double>(j + 1); }
  double midpoint(int j) const {
    return dt_ * (static_cast<double>(j) + 0.5);
  }
  // Cell containing t, clamped to [0, cells-1]; cells are [t_j, t_{j+1}).
  int cell_of(double t) const;

  bool operator==(const TimeGrid&) const = default;

private:
  double horizon_;
  int cells_;
  double dt_;
};

// Finite counting measure on [0, horizon]: sorted atom times.
class PointConfiguration {
public:
  PointConfiguration() = default;
  PointConfiguration(std::vector<double> times, double horizon);

  long count() const { return static_cast<long>(times_.size()); }
  const std::vector<double>& times() const { return times_; }
  double horizon() const { return horizon_; }

private:
  std::vector<double> times_;
  double horizon_ = 0.0;
};

// Piecewise-constant event density rho_j >= 0 on a TimeGrid; the measure of
// a set is integral of the density over it.
class IntensityMeasure {
public:
  IntensityMeasure(TimeGrid grid, std::vector<double> density);
  static IntensityMeasure uniform(const TimeGrid& grid, double rate);

  const TimeGrid& grid() const { return grid_; }
  double density(int j) const { return density_[j]; }
  double density_at(double s) const { return density_[grid_.cell_of(s)]; }
  double cell_mass(int j) const { return density_[j] * grid_.dt(); }
  double total_mass() const;
  // Mass of [0, t_k] for a cell-boundary index k in [0, cells].
  double prefix_mass(int k) const;

private:
  TimeGrid grid_;
  std::vector<double> density_;
};

// Draws a Poisson configuration with intensity rho: cell counts are Poisson
// with mean rho_j*dt, positions uniform in the cell. Pure in (rho, stream):
// cell j consumes stream.substream(j) only, so calls with equal keys agree.
PointConfiguration sample_poisson(const IntensityMeasure& rho,
                                  const RngStream& stream);

// sum over atoms z of y of h(z).
double stieltjes_integral(const std::function<double(double)>& h,
                          const PointConfiguration& y);

// stieltjes_integral(h, y) minus the compensator sum_j h(mid_j) rho_j dt
// (cell-exact for piecewise-constant h; exact in mean for cell-linear h).
double compensated_integral(const std::function<double(double)>& h,
                            const PointConfiguration& y,
                            const IntensityMeasure& rho);

// Copy of y with one extra atom at z; z must lie in [0, horizon].
PointConfiguration add_atom(const PointConfiguration& y, double z);

}  // namespace poischan::point_process
