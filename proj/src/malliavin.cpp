#include "poischan/malliavin.hpp"

#include <algorithm>
#include <stdexcept>

#include "poischan/parallel.hpp"
#include "poischan/stats.hpp"

namespace poischan::malliavin {

using point_process::add_atom;
using point_process::compensated_integral;

double difference(const Functional& F, const PointConfiguration& y, double z) {
  return F(add_atom(y, z)) - F(y);
}

double evaluation_point(const TimeGrid& grid, int cell,
                        const PointConfiguration& y) {
  double s = grid.midpoint(cell);
  const auto& t = y.times();
  while (std::binary_search(t.begin(), t.end(), s))
    s += grid.dt() * 0x1.0p-20;
  return s;
}

double integrated_gradient(const Functional& F, const PointConfiguration& y,
                           const std::vector<bool>& cells,
                           const IntensityMeasure& nu) {
  const TimeGrid& grid = nu.grid();
  if (static_cast<int>(cells.size()) != grid.cells())
    throw std::invalid_argument(
        "integrated_gradient: mask size must equal cell count");
  double acc = 0.0;
  for (int j = 0; j < grid.cells(); ++j) {
    if (!cells[j]) continue;
    const double s = evaluation_point(grid, j, y);
    acc += difference(F, y, s) * nu.cell_mass(j);
  }
  return acc;
}

double chain_rule_residual(const Functional& F, const Functional& G,
                           const PointConfiguration& y, double z) {
  const PointConfiguration yz = add_atom(y, z);
  const double f0 = F(y), f1 = F(yz);
  const double g0 = G(y), g1 = G(yz);
  const double df = f1 - f0;
  const double dg = g1 - g0;
  const double dfg = f1 * g1 - f0 * g0;
  return dfg - (f0 * dg + g0 * df + df * dg);
}

IbpCheck ibp_check(const Functional& F, const std::function<double(double)>& h,
                   const IntensityMeasure& nu, int n_samples,
                   std::uint64_t seed) {
  if (n_samples < 2)
    throw std::invalid_argument("ibp_check: n_samples must be >= 2");
  const TimeGrid& grid = nu.grid();
  const RngStream root(seed);
  std::vector<double> lhs(n_samples), rhs(n_samples), diff(n_samples);
  parallel_for(static_cast<std::size_t>(n_samples), [&](std::size_t i) {
    const PointConfiguration y =
        sample_poisson(nu, root.substream(static_cast<std::uint64_t>(i)));
    lhs[i] = F(y) * compensated_integral(h, y, nu);
    double r = 0.0;
    for (int j = 0; j < grid.cells(); ++j) {
      const double s = evaluation_point(grid, j, y);
      r += difference(F, y, s) * h(grid.midpoint(j)) * nu.cell_mass(j);
    }
    rhs[i] = r;
    diff[i] = lhs[i] - rhs[i];
  });
  IbpCheck out;
  out.lhs = mean_stderr(lhs).mean;
  out.rhs = mean_stderr(rhs).mean;
  out.diff_se = mean_stderr(diff).se;
  return out;
}

}  // namespace poischan::malliavin
