#pragma once

#include <cstdint>
#include <vector>

#include "poischan/point_process.hpp"
#include "poischan/rng.hpp"

namespace poischan::channels {

using point_process::IntensityMeasure;
using point_process::PointConfiguration;
using point_process::TimeGrid;

// Channel coefficients: observation intensity is lambda + alpha * signal.
struct ChannelParams {
  double lambda = 1.0;
  double alpha = 1.0;

  ChannelParams(double lambda_, double alpha_);
};

// Non-negative piecewise-constant signal path on a grid.
class IntensityPath {
public:
  IntensityPath(TimeGrid grid, std::vector<double> values);
  static IntensityPath constant(const TimeGrid& grid, double level);

  const TimeGrid& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  double value(int j) const { return values_[j]; }
  double value_at(double s) const { return values_[grid_.cell_of(s)]; }
  // integral of the path against nu, cell-exact.
  double integral(const IntensityMeasure& nu) const;

private:
  TimeGrid grid_;
  std::vector<double> values_;
};

// Per-cell channel switch: 1 = counting cell, 0 = diffusion cell.
class SwitchFunction {
public:
  SwitchFunction(TimeGrid grid, std::vector<std::uint8_t> poisson_cells);
  static SwitchFunction constant(const TimeGrid& grid, bool poisson);

  const TimeGrid& grid() const { return grid_; }
  bool poisson_cell(int j) const { return cells_[j] != 0; }
  bool all_poisson() const;
  bool all_gaussian() const;

private:
  TimeGrid grid_;
  std::vector<std::uint8_t> cells_;
};

// Mixed observation: jump times in counting cells plus one Gaussian
// increment per diffusion cell (entries on counting cells are unused and
// kept at zero).
struct MixtureObservation {
  PointConfiguration jumps;
  std::vector<double> gaussian_increments;
};

// Throws if a jump of obs lies in a diffusion cell or the increment vector
// has the wrong size.
void check_mixture_consistent(const MixtureObservation& obs,
                              const SwitchFunction& phi);

// log of the scalar channel density  exp(-((lambda-1) + alpha x)) *
// (lambda + alpha x)^y  relative to the unit Poisson law.
double discrete_log_density(long y, double x, double lambda, double alpha);

// Scalar channel draw: Poisson(lambda + alpha x).
long discrete_sample(double x, double lambda, double alpha,
                     const RngStream& stream);

// log-likelihood of a counting observation for signal path x:
//   sum_k log(lambda + alpha x(z_k)) - sum_j (lambda - 1 + alpha x_j) rho_j dt
// The compensator equals (lambda-1) nu([0,T]) + alpha * integral of x dnu,
// accumulated cell by cell so the mixture likelihood with all-counting
// switch reproduces it bit for bit.
double log_likelihood_path(const PointConfiguration& y, const IntensityPath& x,
                           const ChannelParams& p, const IntensityMeasure& nu);

// Observation law given the path: counting process with per-cell event
// density lambda + alpha x_j (per unit time).
PointConfiguration path_sample(const IntensityPath& x, const ChannelParams& p,
                               const RngStream& stream);

// Cell densities (lambda + alpha x_j) * rho_j: the output intensity when the
// reference measure is nu. Used so joint sampling stays consistent with
// log_likelihood_path for non-uniform nu; equals path_sample's law when nu
// has unit density.
IntensityMeasure output_intensity(const IntensityPath& x,
                                  const ChannelParams& p,
                                  const IntensityMeasure& nu);

// Mixed-channel log-likelihood: diffusion cells contribute
// (lambda-1+alpha x_j) g_j - (1/2)(lambda-1+alpha x_j)^2 dt, counting cells
// contribute the jump terms minus (lambda-1+alpha x_j) dt.
double log_likelihood_mixture(const MixtureObservation& obs,
                              const IntensityPath& x, const ChannelParams& p,
                              const SwitchFunction& phi);

// Mixed-channel draw: diffusion cells g_j ~ N((lambda-1+alpha x_j) dt, dt),
// counting cells as in path_sample. Cell j consumes stream.substream(j), so
// an all-counting switch reproduces path_sample bit for bit.
MixtureObservation mixture_sample(const IntensityPath& x,
                                  const ChannelParams& p,
                                  const SwitchFunction& phi,
                                  const RngStream& stream);

// Derivatives of log_likelihood_path in the channel coefficients.
double dlogl_dalpha(const PointConfiguration& y, const IntensityPath& x,
                    const ChannelParams& p, const IntensityMeasure& nu);
double dlogl_dlambda(const PointConfiguration& y, const IntensityPath& x,
                     const ChannelParams& p, const IntensityMeasure& nu);

// Smallest y whose Poisson(rate) upper tail mass is below tail_bound.
long truncation_count(double rate, double tail_bound = 1e-14);

}  // namespace poischan::channels
