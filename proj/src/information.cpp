#include "poischan/information.hpp"

#include <cmath>
#include <stdexcept>

#include "poischan/parallel.hpp"
#include "poischan/stats.hpp"

namespace poischan::information {

using bayes::marginal_mixture;
using bayes::marginal_path;
using bayes::posterior_mean_cells;
using channels::IntensityPath;
using channels::MixtureObservation;
using point_process::PointConfiguration;
using point_process::TimeGrid;

double psi_lambda(double x, double lambda) {
  if (!(x > 0.0))
    throw std::domain_error("psi_lambda: argument must be positive");
  return (x - lambda) * std::log(x);
}

double DerivativeReport::combined_se() const {
  return std::hypot(formula_se, fd_se);
}

namespace {

void require_replicates(long n) {
  if (n < 2)
    throw std::invalid_argument("monte carlo: n_outer must be >= 2");
}

// One joint draw per replicate. Replicate i derives root.substream(i); the
// member index consumes substream(0) of that, the channel draw substream(1),
// so +/- h evaluations share every random input.
void for_each_joint_path(const FinitePathPrior& prior,
                         const ChannelParams& params,
                         const IntensityMeasure& nu, long n,
                         std::uint64_t seed,
                         const std::function<void(long, int,
                                                  const PointConfiguration&)>& fn) {
  require_replicates(n);
  const RngStream root(seed);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
    const RngStream rep = root.substream(i);
    RngStream pick = rep.substream(0);
    const int k = draw_index(prior.weights(), pick.uniform());
    const PointConfiguration y = sample_poisson(
        channels::output_intensity(prior.member(k), params, nu),
        rep.substream(1));
    fn(static_cast<long>(i), k, y);
  });
}

void for_each_joint_mixture(
    const FinitePathPrior& prior, const ChannelParams& params,
    const SwitchFunction& phi, long n, std::uint64_t seed,
    const std::function<void(long, int, const MixtureObservation&)>& fn) {
  require_replicates(n);
  const RngStream root(seed);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
    const RngStream rep = root.substream(i);
    RngStream pick = rep.substream(0);
    const int k = draw_index(prior.weights(), pick.uniform());
    const MixtureObservation obs =
        channels::mixture_sample(prior.member(k), params, phi, rep.substream(1));
    fn(static_cast<long>(i), k, obs);
  });
}

// Per-cell terms; the pure-channel sums and the counting branch of the
// mixture sums use the same expressions so an all-counting switch reproduces
// the pure results bit for bit. With equal arguments every term is exactly
// zero, which keeps single-member priors exact.
double seg_count_dalpha(double a, double b, const ChannelParams& p) {
  return (psi_lambda(p.lambda + p.alpha * a, p.lambda) -
          psi_lambda(p.lambda + p.alpha * b, p.lambda)) /
         p.alpha;
}

double seg_count_dlambda(double a, double b, const ChannelParams& p) {
  return std::log(p.lambda + p.alpha * a) - std::log(p.lambda + p.alpha * b);
}

double seg_diffusion_dalpha(double a, double b, const ChannelParams& p) {
  return (p.lambda - 1.0 + p.alpha * a) * a -
         (p.lambda - 1.0 + p.alpha * b) * b;
}

double seg_diffusion_dlambda(double a, double b, const ChannelParams& p) {
  return (p.lambda - 1.0 + p.alpha * a) - (p.lambda - 1.0 + p.alpha * b);
}

DerivativeReport assemble_report(
    std::string param, const MeanStderr& formula,
    const std::function<std::vector<double>(double)>& f, double p0,
    double step) {
  const double h = step > 0.0 ? step : 1e-3 * p0;
  DerivativeReport report;
  report.param = std::move(param);
  report.formula = formula.mean;
  report.formula_se = formula.se;
  report.step = h;
  const McEstimate d = finite_difference(f, p0, h);
  const McEstimate dh = finite_difference(f, p0, h / 2.0);
  report.fd = d.value;
  report.fd_se = d.se;
  report.fd_half = dh.value;
  report.richardson = (4.0 * dh.value - d.value) / 3.0;
  report.tolerance = 4.0 * report.combined_se();
  report.pass = std::fabs(report.formula - report.fd) <= report.tolerance;
  return report;
}

}  // namespace

MIEstimate mutual_information_poisson(const FinitePathPrior& prior,
                                      const ChannelParams& params,
                                      const IntensityMeasure& nu, long n_outer,
                                      std::uint64_t seed) {
  std::vector<double> logl(n_outer), logm(n_outer), diff(n_outer);
  for_each_joint_path(prior, params, nu, n_outer, seed,
                      [&](long i, int k, const PointConfiguration& y) {
                        logl[i] = channels::log_likelihood_path(
                            y, prior.member(k), params, nu);
                        logm[i] = marginal_path(y, prior, params, nu).log_m;
                        diff[i] = logl[i] - logm[i];
                      });
  const MeanStderr d = mean_stderr(diff);
  MIEstimate out;
  out.value = d.mean;
  out.se = d.se;
  out.n_outer = n_outer;
  out.e_log_likelihood = mean_stderr(logl).mean;
  out.e_log_marginal = mean_stderr(logm).mean;
  return out;
}

double mutual_information_discrete_exact(const FiniteScalarPrior& prior,
                                         double lambda, double alpha,
                                         double tail_bound) {
  if (!(lambda > 0.0) || !(alpha > 0.0))
    throw std::domain_error(
        "mutual_information_discrete_exact: lambda, alpha must be positive");
  const long y_max =
      channels::truncation_count(lambda + alpha * prior.max_atom(), tail_bound);
  const int n = prior.size();
  std::vector<double> logf(n), a(n);
  double mi = 0.0;
  for (long y = 0; y <= y_max; ++y) {
    for (int i = 0; i < n; ++i) {
      const double rate = lambda + alpha * prior.atom(i);
      logf[i] = static_cast<double>(y) * std::log(rate) - rate -
                std::lgamma(static_cast<double>(y) + 1.0);
      a[i] = std::log(prior.weight(i)) + logf[i];
    }
    const double log_m = log_sum_exp(a);
    for (int i = 0; i < n; ++i)
      mi += prior.weight(i) * std::exp(logf[i]) * (logf[i] - log_m);
  }
  return mi;
}

McEstimate debruijn_dalpha(const FinitePathPrior& prior,
                           const ChannelParams& params,
                           const IntensityMeasure& nu, long n_outer,
                           std::uint64_t seed) {
  std::vector<double> v(n_outer);
  for_each_joint_path(
      prior, params, nu, n_outer, seed,
      [&](long i, int, const PointConfiguration& y) {
        const std::vector<double> mean = posterior_mean_cells(
            prior, marginal_path(y, prior, params, nu).weights);
        double acc = 0.0;
        for (int j = 0; j < nu.grid().cells(); ++j)
          acc += psi_lambda(params.lambda + params.alpha * mean[j],
                            params.lambda) /
                 params.alpha * nu.cell_mass(j);
        v[i] = acc;
      });
  const MeanStderr m = mean_stderr(v);
  return {m.mean, m.se};
}

McEstimate debruijn_dlambda(const FinitePathPrior& prior,
                            const ChannelParams& params,
                            const IntensityMeasure& nu, long n_outer,
                            std::uint64_t seed) {
  std::vector<double> v(n_outer);
  for_each_joint_path(
      prior, params, nu, n_outer, seed,
      [&](long i, int, const PointConfiguration& y) {
        const std::vector<double> mean = posterior_mean_cells(
            prior, marginal_path(y, prior, params, nu).weights);
        double acc = 0.0;
        for (int j = 0; j < nu.grid().cells(); ++j)
          acc += std::log(params.lambda + params.alpha * mean[j]) *
                 nu.cell_mass(j);
        v[i] = acc;
      });
  const MeanStderr m = mean_stderr(v);
  return {m.mean, m.se};
}

std::vector<double> mi_replicates(const FinitePathPrior& prior,
                                  const ChannelParams& params,
                                  const IntensityMeasure& nu, long n_outer,
                                  std::uint64_t seed) {
  std::vector<double> v(n_outer);
  for_each_joint_path(prior, params, nu, n_outer, seed,
                      [&](long i, int k, const PointConfiguration& y) {
                        v[i] = channels::log_likelihood_path(
                                   y, prior.member(k), params, nu) -
                               marginal_path(y, prior, params, nu).log_m;
                      });
  return v;
}

std::vector<double> marginal_loglik_replicates(const FinitePathPrior& prior,
                                               const ChannelParams& params,
                                               const IntensityMeasure& nu,
                                               long n_outer,
                                               std::uint64_t seed) {
  std::vector<double> v(n_outer);
  for_each_joint_path(prior, params, nu, n_outer, seed,
                      [&](long i, int, const PointConfiguration& y) {
                        v[i] = marginal_path(y, prior, params, nu).log_m;
                      });
  return v;
}

std::vector<double> mixture_mi_replicates(const FinitePathPrior& prior,
                                          const ChannelParams& params,
                                          const SwitchFunction& phi,
                                          long n_outer, std::uint64_t seed) {
  std::vector<double> v(n_outer);
  for_each_joint_mixture(prior, params, phi, n_outer, seed,
                         [&](long i, int k, const MixtureObservation& obs) {
                           v[i] = channels::log_likelihood_mixture(
                                      obs, prior.member(k), params, phi) -
                                  marginal_mixture(obs, prior, params, phi)
                                      .log_m;
                         });
  return v;
}

DerivativeReport mi_dalpha(const FinitePathPrior& prior,
                           const ChannelParams& params,
                           const IntensityMeasure& nu, long n_outer,
                           std::uint64_t seed, double step) {
  std::vector<double> v(n_outer);
  for_each_joint_path(
      prior, params, nu, n_outer, seed,
      [&](long i, int k, const PointConfiguration& y) {
        const std::vector<double> mean = posterior_mean_cells(
            prior, marginal_path(y, prior, params, nu).weights);
        const IntensityPath& x = prior.member(k);
        double acc = 0.0;
        for (int j = 0; j < nu.grid().cells(); ++j)
          acc += seg_count_dalpha(x.value(j), mean[j], params) *
                 nu.cell_mass(j);
        v[i] = acc;
      });
  return assemble_report(
      "alpha", mean_stderr(v),
      [&](double a) {
        return mi_replicates(prior, ChannelParams(params.lambda, a), nu,
                             n_outer, seed);
      },
      params.alpha, step);
}

DerivativeReport mi_dlambda(const FinitePathPrior& prior,
                            const ChannelParams& params,
                            const IntensityMeasure& nu, long n_outer,
                            std::uint64_t seed, double step) {
  std::vector<double> v(n_outer);
  for_each_joint_path(
      prior, params, nu, n_outer, seed,
      [&](long i, int k, const PointConfiguration& y) {
        const std::vector<double> mean = posterior_mean_cells(
            prior, marginal_path(y, prior, params, nu).weights);
        const IntensityPath& x = prior.member(k);
        double acc = 0.0;
        for (int j = 0; j < nu.grid().cells(); ++j)
          acc += seg_count_dlambda(x.value(j), mean[j], params) *
                 nu.cell_mass(j);
        v[i] = acc;
      });
  return assemble_report(
      "lambda", mean_stderr(v),
      [&](double l) {
        return mi_replicates(prior, ChannelParams(l, params.alpha), nu,
                             n_outer, seed);
      },
      params.lambda, step);
}

DerivativeReport mixture_mi_dalpha(const FinitePathPrior& prior,
                                   const ChannelParams& params,
                                   const SwitchFunction& phi, long n_outer,
                                   std::uint64_t seed, double step) {
  const double dt = phi.grid().dt();
  std::vector<double> v(n_outer);
  for_each_joint_mixture(
      prior, params, phi, n_outer, seed,
      [&](long i, int k, const MixtureObservation& obs) {
        const std::vector<double> mean = posterior_mean_cells(
            prior, marginal_mixture(obs, prior, params, phi).weights);
        const IntensityPath& x = prior.member(k);
        double acc = 0.0;
        for (int j = 0; j < phi.grid().cells(); ++j) {
          const double term =
              phi.poisson_cell(j)
                  ? seg_count_dalpha(x.value(j), mean[j], params)
                  : seg_diffusion_dalpha(x.value(j), mean[j], params);
          acc += term * dt;
        }
        v[i] = acc;
      });
  return assemble_report(
      "alpha", mean_stderr(v),
      [&](double a) {
        return mixture_mi_replicates(prior, ChannelParams(params.lambda, a),
                                     phi, n_outer, seed);
      },
      params.alpha, step);
}

DerivativeReport mixture_mi_dlambda(const FinitePathPrior& prior,
                                    const ChannelParams& params,
                                    const SwitchFunction& phi, long n_outer,
                                    std::uint64_t seed, double step) {
  const double dt = phi.grid().dt();
  std::vector<double> v(n_outer);
  for_each_joint_mixture(
      prior, params, phi, n_outer, seed,
      [&](long i, int k, const MixtureObservation& obs) {
        const std::vector<double> mean = posterior_mean_cells(
            prior, marginal_mixture(obs, prior, params, phi).weights);
        const IntensityPath& x = prior.member(k);
        double acc = 0.0;
        for (int j = 0; j < phi.grid().cells(); ++j) {
          const double term =
              phi.poisson_cell(j)
                  ? seg_count_dlambda(x.value(j), mean[j], params)
                  : seg_diffusion_dlambda(x.value(j), mean[j], params);
          acc += term * dt;
        }
        v[i] = acc;
      });
  return assemble_report(
      "lambda", mean_stderr(v),
      [&](double l) {
        return mixture_mi_replicates(prior, ChannelParams(l, params.alpha),
                                     phi, n_outer, seed);
      },
      params.lambda, step);
}

McEstimate finite_difference(
    const std::function<std::vector<double>(double)>& f, double p0, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_difference: h must be > 0");
  const std::vector<double> up = f(p0 + h);
  const std::vector<double> down = f(p0 - h);
  if (up.size() != down.size() || up.empty())
    throw std::invalid_argument(
        "finite_difference: f must return equally sized non-empty vectors");
  std::vector<double> d(up.size());
  for (std::size_t i = 0; i < up.size(); ++i)
    d[i] = (up[i] - down[i]) / (2.0 * h);
  const MeanStderr m = mean_stderr(d);
  return {m.mean, m.se};
}

}  // namespace poischan::information
