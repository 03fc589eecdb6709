#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "poischan/point_process.hpp"

namespace poischan::malliavin {

using point_process::IntensityMeasure;
using point_process::PointConfiguration;
using point_process::TimeGrid;

using Functional = std::function<double(const PointConfiguration&)>;

// Add-one-atom difference: F(y + delta_z) - F(y). z must lie in the domain.
double difference(const Functional& F, const PointConfiguration& y, double z);

// Evaluation point for a cell: the midpoint, nudged by dt*2^-20 if the
// midpoint collides exactly with an atom of y (collision would double an
// existing atom rather than add a fresh one).
double evaluation_point(const TimeGrid& grid, int cell,
                        const PointConfiguration& y);

// Integral over A of D_s F nu(ds), where A is a union of whole grid cells
// given as a membership mask (size = cell count). The integrand is evaluated
// at cell evaluation points, which is cell-exact for the piecewise-constant
// functionals used here.
double integrated_gradient(const Functional& F, const PointConfiguration& y,
                           const std::vector<bool>& cells,
                           const IntensityMeasure& nu);

// D(FG) - [F*DG + G*DF + DF*DG] at (y, z); identically zero in exact
// arithmetic.
double chain_rule_residual(const Functional& F, const Functional& G,
                           const PointConfiguration& y, double z);

struct IbpCheck {
  double lhs = 0.0;       // E[F * I1(h)] under the nu-Poisson law
  double rhs = 0.0;       // E[integral of D_s F h(s) nu(ds)]
  double diff_se = 0.0;   // standard error of the paired difference
};

// Monte-Carlo integration-by-parts check with common samples on both sides.
IbpCheck ibp_check(const Functional& F, const std::function<double(double)>& h,
                   const IntensityMeasure& nu, int n_samples,
                   std::uint64_t seed);

}  // namespace poischan::malliavin
