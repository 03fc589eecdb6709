#include "poischan/point_process.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace poischan::point_process {

TimeGrid::TimeGrid(double horizon, int cells)
    : horizon_(horizon), cells_(cells) {
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw std::invalid_argument("TimeGrid: horizon must be positive");
  if (cells < 1) throw std::invalid_argument("TimeGrid: cells must be >= 1");
  dt_ = horizon_ / static_cast<double>(cells_);
}

int TimeGrid::cell_of(double t) const {
  int j = static_cast<int>(std::floor(t / dt_));
  if (j < 0) j = 0;
  if (j >= cells_) j = cells_ - 1;
  // Guard against floor(t/dt) landing one off at a cell boundary.
  if (t < left(j) && j > 0) --j;
  if (t >= right(j) && j < cells_ - 1) ++j;
  return j;
}

PointConfiguration::PointConfiguration(std::vector<double> times,
                                       double horizon)
    : times_(std::move(times)), horizon_(horizon) {
  if (!(horizon > 0.0))
    throw std::invalid_argument("PointConfiguration: horizon must be positive");
  for (double t : times_)
    if (!(t >= 0.0) || !(t <= horizon_) || !std::isfinite(t))
      throw std::invalid_argument(
          "PointConfiguration: atom outside [0, horizon]");
  std::sort(times_.begin(), times_.end());
}

IntensityMeasure::IntensityMeasure(TimeGrid grid, std::vector<double> density)
    : grid_(grid), density_(std::move(density)) {
  if (static_cast<int>(density_.size()) != grid_.cells())
    throw std::invalid_argument(
        "IntensityMeasure: density size must equal cell count");
  for (double d : density_)
    if (!(d >= 0.0) || !std::isfinite(d))
      throw std::invalid_argument(
          "IntensityMeasure: density must be finite and >= 0");
}

IntensityMeasure IntensityMeasure::uniform(const TimeGrid& grid, double rate) {
  return IntensityMeasure(grid,
                          std::vector<double>(grid.cells(), rate));
}

double IntensityMeasure::total_mass() const {
  return prefix_mass(grid_.cells());
}

double IntensityMeasure::prefix_mass(int k) const {
  if (k < 0 || k > grid_.cells())
    throw std::out_of_range("IntensityMeasure: boundary index out of range");
  double m = 0.0;
  for (int j = 0; j < k; ++j) m += cell_mass(j);
  return m;
}

PointConfiguration sample_poisson(const IntensityMeasure& rho,
                                  const RngStream& stream) {
  const TimeGrid& grid = rho.grid();
  std::vector<double> times;
  for (int j = 0; j < grid.cells(); ++j) {
    RngStream sub = stream.substream(static_cast<std::uint64_t>(j));
    const long k = sub.poisson(rho.cell_mass(j));
    const std::size_t start = times.size();
    for (long i = 0; i < k; ++i)
      times.push_back(grid.left(j) + grid.dt() * sub.uniform());
    std::sort(times.begin() + static_cast<std::ptrdiff_t>(start), times.end());
  }
  return PointConfiguration(std::move(times), grid.horizon());
}

double stieltjes_integral(const std::function<double(double)>& h,
                          const PointConfiguration& y) {
  double s = 0.0;
  for (double z : y.times()) s += h(z);
  return s;
}

double compensated_integral(const std::function<double(double)>& h,
                            const PointConfiguration& y,
                            const IntensityMeasure& rho) {
  const TimeGrid& grid = rho.grid();
  double comp = 0.0;
  for (int j = 0; j < grid.cells(); ++j)
    comp += h(grid.midpoint(j)) * rho.cell_mass(j);
  return stieltjes_integral(h, y) - comp;
}

PointConfiguration add_atom(const PointConfiguration& y, double z) {
  if (!(z >= 0.0) || !(z <= y.horizon()))
    throw std::domain_error("add_atom: point outside [0, horizon]");
  std::vector<double> times = y.times();
  times.insert(std::upper_bound(times.begin(), times.end(), z), z);
  return PointConfiguration(std::move(times), y.horizon());
}

}  // namespace poischan::point_process
