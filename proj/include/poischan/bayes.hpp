#pragma once

#include <cstdint>
#include <vector>

#include "poischan/channels.hpp"
#include "poischan/point_process.hpp"

namespace poischan::bayes {

using channels::ChannelParams;
using channels::IntensityPath;
using channels::MixtureObservation;
using channels::SwitchFunction;
using point_process::IntensityMeasure;
using point_process::PointConfiguration;
using point_process::TimeGrid;

// Finitely supported scalar signal law; weights are normalized on input.
class FiniteScalarPrior {
public:
  FiniteScalarPrior(std::vector<double> atoms, std::vector<double> weights);

  int size() const { return static_cast<int>(atoms_.size()); }
  double atom(int i) const { return atoms_[i]; }
  double weight(int i) const { return weights_[i]; }
  const std::vector<double>& atoms() const { return atoms_; }
  const std::vector<double>& weights() const { return weights_; }
  double max_atom() const;

private:
  std::vector<double> atoms_;
  std::vector<double> weights_;
};

// Finitely supported path law on a common grid.
class FinitePathPrior {
public:
  FinitePathPrior(std::vector<IntensityPath> members,
                  std::vector<double> weights);

  int size() const { return static_cast<int>(members_.size()); }
  const IntensityPath& member(int i) const { return members_[i]; }
  double weight(int i) const { return weights_[i]; }
  const std::vector<double>& weights() const { return weights_; }
  const TimeGrid& grid() const { return members_.front().grid(); }
  double max_value() const;

private:
  std::vector<IntensityPath> members_;
  std::vector<double> weights_;
};

// One constant path per prior atom, same weights.
FinitePathPrior constant_path_prior(const FiniteScalarPrior& prior,
                                    const TimeGrid& grid);

// Generative path family for empirical priors.
struct PathPriorSampler {
  enum class Kind { ConstantLevel, TwoStateMarkov };
  Kind kind = Kind::ConstantLevel;
  TimeGrid grid;

  // ConstantLevel: a level drawn from this marginal, held over [0, T].
  std::vector<double> levels;
  std::vector<double> level_weights;

  // TwoStateMarkov: stationary two-state chain observed per cell.
  double level0 = 0.0;
  double level1 = 1.0;
  double rate01 = 1.0;  // 0 -> 1 switching rate
  double rate10 = 1.0;  // 1 -> 0 switching rate

  std::uint64_t seed = 0;
};

// n draws from the sampler as an equally weighted empirical prior.
FinitePathPrior sample_prior_paths(const PathPriorSampler& sampler, int n);

// Marginal likelihood of the scalar channel relative to the unit Poisson
// law: sum_i w_i exp(discrete_log_density(y, x_i)).
double marginal_discrete(long y, const FiniteScalarPrior& prior, double lambda,
                         double alpha);

// Posterior mean through the one-step marginal ratio:
//   (m(y+1) - m(y)) / (alpha m(y)) - (lambda - 1) / alpha.
double conditional_mean_discrete(long y, const FiniteScalarPrior& prior,
                                 double lambda, double alpha);

// Posterior mean by direct enumeration with lgamma-based Poisson pmfs; an
// independent route kept free of the marginal-ratio code above.
double conditional_mean_enumeration(long y, const FiniteScalarPrior& prior,
                                    double lambda, double alpha);

struct MarginalPath {
  double log_m = 0.0;
  std::vector<double> weights;  // posterior member weights, normalized
};

MarginalPath marginal_path(const PointConfiguration& y,
                           const FinitePathPrior& prior,
                           const ChannelParams& params,
                           const IntensityMeasure& nu);

// Mixed-channel marginal: same shape, mixture likelihood.
MarginalPath marginal_mixture(const MixtureObservation& obs,
                              const FinitePathPrior& prior,
                              const ChannelParams& params,
                              const SwitchFunction& phi);

// Weighted per-cell mean of the prior members under the given normalized
// weights; the accumulation every posterior-mean consumer shares.
std::vector<double> posterior_mean_cells(const FinitePathPrior& prior,
                                         const std::vector<double>& weights);

// Per-cell posterior mean of the signal: sum_i p_i x_i(s), evaluated with
// the posterior weights of marginal_path.
std::vector<double> conditional_mean_weighting(const PointConfiguration& y,
                                               const FinitePathPrior& prior,
                                               const ChannelParams& params,
                                               const IntensityMeasure& nu);

struct PosteriorReport {
  std::vector<double> s;                  // cell midpoints
  std::vector<double> estimate_gradient;  // pointwise posterior mean, gradient route
  std::vector<double> estimate_oracle;    // pointwise posterior mean, weighting route
  std::vector<double> cumulative;         // posterior mean of the integrated signal
                                          // at right cell boundaries, gradient route
  std::vector<double> weights;            // posterior member weights
  double max_abs_diff = 0.0;  // max |gradient - oracle| / max(1, |oracle|)
  double ess = 0.0;           // effective sample size of the weights
  int n_members = 0;
  bool ess_warning = false;   // ess < 0.01 * n_members
};

// Pointwise posterior mean via the add-one-atom marginal ratio
//   (m(y + delta_s)/m(y) - lambda) / alpha
// per cell, with the weighting route filled in as the oracle column, plus
// the cumulative estimate from the integrated gradient of log m.
PosteriorReport conditional_mean_gradient(const PointConfiguration& y,
                                          const FinitePathPrior& prior,
                                          const ChannelParams& params,
                                          const IntensityMeasure& nu);

// Mixed-channel analogue; the gradient column uses the posterior-weighted
// one-atom ratio sum_i p_i (lambda - 1 + alpha x_i(s)) mapped through the
// same normalization, the oracle column is the plain weighting.
PosteriorReport conditional_mean_mixture(const MixtureObservation& obs,
                                         const FinitePathPrior& prior,
                                         const ChannelParams& params,
                                         const SwitchFunction& phi);

}  // namespace poischan::bayes
