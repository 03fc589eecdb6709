#include "poischan/bayes.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "poischan/malliavin.hpp"
#include "poischan/stats.hpp"

namespace poischan::bayes {

namespace {

std::vector<double> normalized_weights(std::vector<double> w,
                                       std::size_t expected) {
  if (w.size() != expected || expected == 0)
    throw std::invalid_argument("prior: weights size mismatch");
  double total = 0.0;
  for (double x : w) {
    if (!(x >= 0.0) || !std::isfinite(x))
      throw std::invalid_argument("prior: weights must be finite and >= 0");
    total += x;
  }
  if (!(total > 0.0))
    throw std::invalid_argument("prior: weights must have positive mass");
  for (auto& x : w) x /= total;
  return w;
}

}  // namespace

FiniteScalarPrior::FiniteScalarPrior(std::vector<double> atoms,
                                     std::vector<double> weights)
    : atoms_(std::move(atoms)),
      weights_(normalized_weights(std::move(weights), atoms_.size())) {
  for (double a : atoms_)
    if (!(a >= 0.0) || !std::isfinite(a))
      throw std::invalid_argument(
          "FiniteScalarPrior: atoms must be finite and >= 0");
}

double FiniteScalarPrior::max_atom() const {
  double m = 0.0;
  for (double a : atoms_)
    if (a > m) m = a;
  return m;
}

FinitePathPrior::FinitePathPrior(std::vector<IntensityPath> members,
                                 std::vector<double> weights)
    : members_(std::move(members)),
      weights_(normalized_weights(std::move(weights), members_.size())) {
  for (const auto& m : members_)
    if (!(m.grid() == members_.front().grid()))
      throw std::invalid_argument(
          "FinitePathPrior: members must share one grid");
}

double FinitePathPrior::max_value() const {
  double m = 0.0;
  for (const auto& path : members_)
    for (double v : path.values())
      if (v > m) m = v;
  return m;
}

FinitePathPrior constant_path_prior(const FiniteScalarPrior& prior,
                                    const TimeGrid& grid) {
  std::vector<IntensityPath> members;
  members.reserve(prior.size());
  for (int i = 0; i < prior.size(); ++i)
    members.push_back(IntensityPath::constant(grid, prior.atom(i)));
  return FinitePathPrior(std::move(members), prior.weights());
}

FinitePathPrior sample_prior_paths(const PathPriorSampler& sampler, int n) {
  if (n < 1)
    throw std::invalid_argument("sample_prior_paths: n must be >= 1");
  const TimeGrid& grid = sampler.grid;
  const RngStream root(sampler.seed);
  std::vector<IntensityPath> members;
  members.reserve(n);
  if (sampler.kind == PathPriorSampler::Kind::ConstantLevel) {
    const FiniteScalarPrior marginal(sampler.levels, sampler.level_weights);
    for (int i = 0; i < n; ++i) {
      RngStream sub = root.substream(static_cast<std::uint64_t>(i));
      const int k = draw_index(marginal.weights(), sub.uniform());
      members.push_back(IntensityPath::constant(grid, marginal.atom(k)));
    }
  } else {
    const double q = sampler.rate01 + sampler.rate10;
    if (!(sampler.rate01 >= 0.0) || !(sampler.rate10 >= 0.0) || !(q > 0.0))
      throw std::invalid_argument(
          "sample_prior_paths: switching rates must be >= 0 with positive sum");
    const double pi1 = sampler.rate01 / q;
    const double decay = std::exp(-q * grid.dt());
    for (int i = 0; i < n; ++i) {
      RngStream sub = root.substream(static_cast<std::uint64_t>(i));
      std::vector<double> values(grid.cells());
      // Stationary start, exact two-state transition kernel per cell.
      int state = sub.uniform() < pi1 ? 1 : 0;
      values[0] = state == 1 ? sampler.level1 : sampler.level0;
      for (int j = 1; j < grid.cells(); ++j) {
        const double p1 = pi1 + (state == 1 ? (1.0 - pi1) : -pi1) * decay;
        state = sub.uniform() < p1 ? 1 : 0;
        values[j] = state == 1 ? sampler.level1 : sampler.level0;
      }
      members.emplace_back(grid, std::move(values));
    }
  }
  return FinitePathPrior(std::move(members), std::vector<double>(n, 1.0));
}

double marginal_discrete(long y, const FiniteScalarPrior& prior, double lambda,
                         double alpha) {
  std::vector<double> a(prior.size());
  for (int i = 0; i < prior.size(); ++i)
    a[i] = std::log(prior.weight(i)) +
           channels::discrete_log_density(y, prior.atom(i), lambda, alpha);
  return std::exp(log_sum_exp(a));
}

double conditional_mean_discrete(long y, const FiniteScalarPrior& prior,
                                 double lambda, double alpha) {
  std::vector<double> a0(prior.size()), a1(prior.size());
  for (int i = 0; i < prior.size(); ++i) {
    const double lw = std::log(prior.weight(i));
    a0[i] = lw + channels::discrete_log_density(y, prior.atom(i), lambda, alpha);
    a1[i] =
        lw + channels::discrete_log_density(y + 1, prior.atom(i), lambda, alpha);
  }
  const double ratio = std::exp(log_sum_exp(a1) - log_sum_exp(a0));
  return (ratio - lambda) / alpha;
}

double conditional_mean_enumeration(long y, const FiniteScalarPrior& prior,
                                    double lambda, double alpha) {
  if (y < 0)
    throw std::domain_error("conditional_mean_enumeration: y must be >= 0");
  std::vector<double> a(prior.size());
  for (int i = 0; i < prior.size(); ++i) {
    const double rate = lambda + alpha * prior.atom(i);
    a[i] = std::log(prior.weight(i)) + static_cast<double>(y) * std::log(rate) -
           rate - std::lgamma(static_cast<double>(y) + 1.0);
  }
  const std::vector<double> p = softmax_weights(a);
  double mean = 0.0;
  for (int i = 0; i < prior.size(); ++i) mean += p[i] * prior.atom(i);
  return mean;
}

MarginalPath marginal_path(const PointConfiguration& y,
                           const FinitePathPrior& prior,
                           const ChannelParams& params,
                           const IntensityMeasure& nu) {
  std::vector<double> a(prior.size());
  for (int i = 0; i < prior.size(); ++i)
    a[i] = std::log(prior.weight(i)) +
           channels::log_likelihood_path(y, prior.member(i), params, nu);
  MarginalPath out;
  out.log_m = log_sum_exp(a);
  out.weights = softmax_weights(a);
  return out;
}

MarginalPath marginal_mixture(const MixtureObservation& obs,
                              const FinitePathPrior& prior,
                              const ChannelParams& params,
                              const SwitchFunction& phi) {
  std::vector<double> a(prior.size());
  for (int i = 0; i < prior.size(); ++i)
    a[i] = std::log(prior.weight(i)) +
           channels::log_likelihood_mixture(obs, prior.member(i), params, phi);
  MarginalPath out;
  out.log_m = log_sum_exp(a);
  out.weights = softmax_weights(a);
  return out;
}

std::vector<double> posterior_mean_cells(const FinitePathPrior& prior,
                                         const std::vector<double>& weights) {
  const int cells = prior.grid().cells();
  std::vector<double> mean(cells, 0.0);
  for (int i = 0; i < prior.size(); ++i)
    for (int j = 0; j < cells; ++j)
      mean[j] += weights[i] * prior.member(i).value(j);
  return mean;
}

namespace {

void finish_report(PosteriorReport& report, const FinitePathPrior& prior) {
  report.n_members = prior.size();
  report.ess = effective_sample_size(report.weights);
  report.ess_warning = report.ess < 0.01 * static_cast<double>(prior.size());
  if (report.ess_warning)
    std::fprintf(stderr,
                 "warning: posterior effective sample size %.2f is below 1%% "
                 "of %d members\n",
                 report.ess, prior.size());
  double worst = 0.0;
  for (std::size_t j = 0; j < report.s.size(); ++j) {
    const double scale = std::max(1.0, std::fabs(report.estimate_oracle[j]));
    const double d =
        std::fabs(report.estimate_gradient[j] - report.estimate_oracle[j]) /
        scale;
    if (d > worst) worst = d;
  }
  report.max_abs_diff = worst;
  if (worst > 1e-8)
    throw std::runtime_error(
        "posterior report: gradient and weighting routes disagree");
}

}  // namespace

std::vector<double> conditional_mean_weighting(const PointConfiguration& y,
                                               const FinitePathPrior& prior,
                                               const ChannelParams& params,
                                               const IntensityMeasure& nu) {
  return posterior_mean_cells(prior,
                              marginal_path(y, prior, params, nu).weights);
}

PosteriorReport conditional_mean_gradient(const PointConfiguration& y,
                                          const FinitePathPrior& prior,
                                          const ChannelParams& params,
                                          const IntensityMeasure& nu) {
  const TimeGrid& grid = prior.grid();
  const MarginalPath base = marginal_path(y, prior, params, nu);
  PosteriorReport report;
  report.weights = base.weights;
  report.estimate_oracle = posterior_mean_cells(prior, base.weights);
  report.s.resize(grid.cells());
  report.estimate_gradient.resize(grid.cells());
  report.cumulative.resize(grid.cells());
  double cum = 0.0;
  for (int j = 0; j < grid.cells(); ++j) {
    report.s[j] = grid.midpoint(j);
    const double z = malliavin::evaluation_point(grid, j, y);
    const MarginalPath bumped =
        marginal_path(point_process::add_atom(y, z), prior, params, nu);
    const double dlog = bumped.log_m - base.log_m;
    report.estimate_gradient[j] = (std::exp(dlog) - params.lambda) / params.alpha;
    cum += std::expm1(dlog) * nu.cell_mass(j);
    report.cumulative[j] =
        cum / params.alpha -
        (params.lambda - 1.0) * nu.prefix_mass(j + 1) / params.alpha;
  }
  finish_report(report, prior);
  return report;
}

PosteriorReport conditional_mean_mixture(const MixtureObservation& obs,
                                         const FinitePathPrior& prior,
                                         const ChannelParams& params,
                                         const SwitchFunction& phi) {
  const TimeGrid& grid = prior.grid();
  PosteriorReport report;
  report.weights = marginal_mixture(obs, prior, params, phi).weights;
  report.estimate_oracle = posterior_mean_cells(prior, report.weights);
  report.s.resize(grid.cells());
  report.estimate_gradient.resize(grid.cells());
  report.cumulative.resize(grid.cells());
  double cum = 0.0;
  for (int j = 0; j < grid.cells(); ++j) {
    report.s[j] = grid.midpoint(j);
    // Posterior-weighted one-atom ratio: sum_i p_i (lambda + alpha x_i(s)).
    double ratio = 0.0;
    for (int i = 0; i < prior.size(); ++i)
      ratio +=
          report.weights[i] * (params.lambda + params.alpha * prior.member(i).value(j));
    report.estimate_gradient[j] = (ratio - params.lambda) / params.alpha;
    cum += (ratio - 1.0) * grid.dt();
    report.cumulative[j] =
        cum / params.alpha -
        (params.lambda - 1.0) * grid.right(j) / params.alpha;
  }
  finish_report(report, prior);
  return report;
}

}  // namespace poischan::bayes
