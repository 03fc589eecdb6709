#include "poischan/channels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace poischan::channels {

ChannelParams::ChannelParams(double lambda_, double alpha_)
    : lambda(lambda_), alpha(alpha_) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("ChannelParams: lambda must be positive");
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw std::invalid_argument("ChannelParams: alpha must be positive");
}

IntensityPath::IntensityPath(TimeGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (static_cast<int>(values_.size()) != grid_.cells())
    throw std::invalid_argument(
        "IntensityPath: values size must equal cell count");
  for (double v : values_)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument(
          "IntensityPath: values must be finite and >= 0");
}

IntensityPath IntensityPath::constant(const TimeGrid& grid, double level) {
  return IntensityPath(grid, std::vector<double>(grid.cells(), level));
}

double IntensityPath::integral(const IntensityMeasure& nu) const {
  if (!(nu.grid() == grid_))
    throw std::invalid_argument("IntensityPath::integral: grid mismatch");
  double s = 0.0;
  for (int j = 0; j < grid_.cells(); ++j)
    s += values_[j] * nu.cell_mass(j);
  return s;
}

SwitchFunction::SwitchFunction(TimeGrid grid,
                               std::vector<std::uint8_t> poisson_cells)
    : grid_(grid), cells_(std::move(poisson_cells)) {
  if (static_cast<int>(cells_.size()) != grid_.cells())
    throw std::invalid_argument(
        "SwitchFunction: mask size must equal cell count");
  for (auto c : cells_)
    if (c > 1)
      throw std::invalid_argument("SwitchFunction: entries must be 0 or 1");
}

SwitchFunction SwitchFunction::constant(const TimeGrid& grid, bool poisson) {
  return SwitchFunction(
      grid, std::vector<std::uint8_t>(grid.cells(), poisson ? 1 : 0));
}

bool SwitchFunction::all_poisson() const {
  return std::all_of(cells_.begin(), cells_.end(),
                     [](std::uint8_t c) { return c != 0; });
}

bool SwitchFunction::all_gaussian() const {
  return std::all_of(cells_.begin(), cells_.end(),
                     [](std::uint8_t c) { return c == 0; });
}

void check_mixture_consistent(const MixtureObservation& obs,
                              const SwitchFunction& phi) {
  const TimeGrid& grid = phi.grid();
  if (static_cast<int>(obs.gaussian_increments.size()) != grid.cells())
    throw std::invalid_argument(
        "MixtureObservation: increment vector size must equal cell count");
  for (double z : obs.jumps.times())
    if (!phi.poisson_cell(grid.cell_of(z)))
      throw std::invalid_argument(
          "MixtureObservation: jump time in a diffusion cell");
}

double discrete_log_density(long y, double x, double lambda, double alpha) {
  if (y < 0) throw std::domain_error("discrete_log_density: y must be >= 0");
  if (!(x >= 0.0))
    throw std::domain_error("discrete_log_density: x must be >= 0");
  const double rate = lambda + alpha * x;
  return -((lambda - 1.0) + alpha * x) +
         static_cast<double>(y) * std::log(rate);
}

long discrete_sample(double x, double lambda, double alpha,
                     const RngStream& stream) {
  if (!(x >= 0.0)) throw std::domain_error("discrete_sample: x must be >= 0");
  RngStream local = stream.substream(0);
  return local.poisson(lambda + alpha * x);
}

double log_likelihood_path(const PointConfiguration& y, const IntensityPath& x,
                           const ChannelParams& p, const IntensityMeasure& nu) {
  const TimeGrid& grid = x.grid();
  if (!(nu.grid() == grid))
    throw std::invalid_argument("log_likelihood_path: grid mismatch");
  double ll = 0.0;
  for (double z : y.times())
    ll += std::log(p.lambda + p.alpha * x.value_at(z));
  for (int j = 0; j < grid.cells(); ++j)
    ll -= (p.lambda - 1.0 + p.alpha * x.value(j)) * nu.cell_mass(j);
  return ll;
}

IntensityMeasure output_intensity(const IntensityPath& x,
                                  const ChannelParams& p,
                                  const IntensityMeasure& nu) {
  const TimeGrid& grid = x.grid();
  if (!(nu.grid() == grid))
    throw std::invalid_argument("output_intensity: grid mismatch");
  std::vector<double> dens(grid.cells());
  for (int j = 0; j < grid.cells(); ++j)
    dens[j] = (p.lambda + p.alpha * x.value(j)) * nu.density(j);
  return IntensityMeasure(grid, std::move(dens));
}

PointConfiguration path_sample(const IntensityPath& x, const ChannelParams& p,
                               const RngStream& stream) {
  const TimeGrid& grid = x.grid();
  std::vector<double> dens(grid.cells());
  for (int j = 0; j < grid.cells(); ++j)
    dens[j] = p.lambda + p.alpha * x.value(j);
  return sample_poisson(IntensityMeasure(grid, std::move(dens)), stream);
}

double log_likelihood_mixture(const MixtureObservation& obs,
                              const IntensityPath& x, const ChannelParams& p,
                              const SwitchFunction& phi) {
  const TimeGrid& grid = x.grid();
  if (!(phi.grid() == grid))
    throw std::invalid_argument("log_likelihood_mixture: grid mismatch");
  check_mixture_consistent(obs, phi);
  const double dt = grid.dt();
  double ll = 0.0;
  for (double z : obs.jumps.times())
    ll += std::log(p.lambda + p.alpha * x.value_at(z));
  for (int j = 0; j < grid.cells(); ++j) {
    const double drift = p.lambda - 1.0 + p.alpha * x.value(j);
    if (phi.poisson_cell(j)) {
      ll -= drift * dt;
    } else {
      ll += drift * obs.gaussian_increments[j] - 0.5 * drift * drift * dt;
    }
  }
  return ll;
}

MixtureObservation mixture_sample(const IntensityPath& x,
                                  const ChannelParams& p,
                                  const SwitchFunction& phi,
                                  const RngStream& stream) {
  const TimeGrid& grid = x.grid();
  if (!(phi.grid() == grid))
    throw std::invalid_argument("mixture_sample: grid mismatch");
  const double dt = grid.dt();
  const double sqrt_dt = std::sqrt(dt);
  std::vector<double> times;
  std::vector<double> inc(grid.cells(), 0.0);
  for (int j = 0; j < grid.cells(); ++j) {
    RngStream sub = stream.substream(static_cast<std::uint64_t>(j));
    if (phi.poisson_cell(j)) {
      const long k = sub.poisson((p.lambda + p.alpha * x.value(j)) * dt);
      const std::size_t start = times.size();
      for (long i = 0; i < k; ++i)
        times.push_back(grid.left(j) + dt * sub.uniform());
      std::sort(times.begin() + static_cast<std::ptrdiff_t>(start),
                times.end());
    } else {
      const double drift = p.lambda - 1.0 + p.alpha * x.value(j);
      inc[j] = drift * dt + sqrt_dt * sub.normal();
    }
  }
  MixtureObservation obs;
  obs.jumps = PointConfiguration(std::move(times), grid.horizon());
  obs.gaussian_increments = std::move(inc);
  return obs;
}

double dlogl_dalpha(const PointConfiguration& y, const IntensityPath& x,
                    const ChannelParams& p, const IntensityMeasure& nu) {
  double d = -x.integral(nu);
  for (double z : y.times()) {
    const double v = x.value_at(z);
    d += v / (p.lambda + p.alpha * v);
  }
  return d;
}

double dlogl_dlambda(const PointConfiguration& y, const IntensityPath& x,
                     const ChannelParams& p, const IntensityMeasure& nu) {
  double d = -nu.total_mass();
  for (double z : y.times())
    d += 1.0 / (p.lambda + p.alpha * x.value_at(z));
  return d;
}

long truncation_count(double rate, double tail_bound) {
  if (!(rate >= 0.0) || !std::isfinite(rate))
    throw std::domain_error("truncation_count: rate must be finite and >= 0");
  if (rate == 0.0) return 0;
  double p = std::exp(-rate);
  double cdf = p;
  long y = 0;
  const long cap =
      static_cast<long>(rate + 200.0 * std::sqrt(rate + 1.0)) + 200;
  while (1.0 - cdf >= tail_bound && y < cap) {
    ++y;
    p *= rate / static_cast<double>(y);
    cdf += p;
  }
  return y;
}

}  // namespace poischan::channels
