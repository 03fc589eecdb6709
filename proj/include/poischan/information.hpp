#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "poischan/bayes.hpp"

namespace poischan::information {

using bayes::FinitePathPrior;
using bayes::FiniteScalarPrior;
using channels::ChannelParams;
using channels::SwitchFunction;
using point_process::IntensityMeasure;

// (x - lambda) * log(x); the integrand of the counting-channel entropy
// derivative. Requires x > 0.
double psi_lambda(double x, double lambda);

struct MIEstimate {
  double value = 0.0;
  double se = 0.0;
  long n_outer = 0;
  double e_log_likelihood = 0.0;  // mean of log L(y_i, x_i)
  double e_log_marginal = 0.0;    // mean of log m(y_i)
};

struct McEstimate {
  double value = 0.0;
  double se = 0.0;
};

struct DerivativeReport {
  std::string param;           // "alpha" or "lambda"
  double formula = 0.0;        // identity-based estimate
  double formula_se = 0.0;
  double fd = 0.0;             // central finite difference, common random numbers
  double fd_se = 0.0;
  double step = 0.0;
  double fd_half = 0.0;        // finite difference at step/2
  double richardson = 0.0;     // (4 fd_half - fd) / 3
  double tolerance = 0.0;      // 4 * combined standard error
  bool pass = false;

  double combined_se() const;
};

// Monte-Carlo mutual information over joint draws (x from the prior, y from
// the channel given x), with the marginal evaluated exactly over the finite
// prior. Pure in (inputs, seed).
MIEstimate mutual_information_poisson(const FinitePathPrior& prior,
                                      const ChannelParams& params,
                                      const IntensityMeasure& nu, long n_outer,
                                      std::uint64_t seed);

// Exact scalar-channel mutual information by truncated summation; the
// truncation point keeps the neglected Poisson tail below tail_bound at the
// largest channel rate.
double mutual_information_discrete_exact(const FiniteScalarPrior& prior,
                                         double lambda, double alpha,
                                         double tail_bound = 1e-14);

// Parameter derivatives of the mean marginal log-likelihood E[log m(Y)]:
//   d/dalpha: (1/alpha) E[ integral of psi_lambda(posterior rate) dnu ]
//   d/dlambda:          E[ integral of log(posterior rate) dnu ]
// where the posterior rate is lambda + alpha * posterior mean of the signal.
McEstimate debruijn_dalpha(const FinitePathPrior& prior,
                           const ChannelParams& params,
                           const IntensityMeasure& nu, long n_outer,
                           std::uint64_t seed);
McEstimate debruijn_dlambda(const FinitePathPrior& prior,
                            const ChannelParams& params,
                            const IntensityMeasure& nu, long n_outer,
                            std::uint64_t seed);

// Mutual-information derivatives: the formula column pairs, per joint draw,
// the closed-form channel term with the posterior term above; the fd column
// differences per-replicate MI values at params +/- step with common random
// numbers. step <= 0 selects 1e-3 times the parameter.
DerivativeReport mi_dalpha(const FinitePathPrior& prior,
                           const ChannelParams& params,
                           const IntensityMeasure& nu, long n_outer,
                           std::uint64_t seed, double step = 0.0);
DerivativeReport mi_dlambda(const FinitePathPrior& prior,
                            const ChannelParams& params,
                            const IntensityMeasure& nu, long n_outer,
                            std::uint64_t seed, double step = 0.0);

// Mixed-channel analogues. Diffusion cells contribute quadratic-risk terms
// (no 1/alpha factor), counting cells the same terms as the pure channel;
// with an all-counting switch these reproduce mi_dalpha / mi_dlambda bit for
// bit on shared seeds.
DerivativeReport mixture_mi_dalpha(const FinitePathPrior& prior,
                                   const ChannelParams& params,
                                   const SwitchFunction& phi, long n_outer,
                                   std::uint64_t seed, double step = 0.0);
DerivativeReport mixture_mi_dlambda(const FinitePathPrior& prior,
                                    const ChannelParams& params,
                                    const SwitchFunction& phi, long n_outer,
                                    std::uint64_t seed, double step = 0.0);

// Central finite difference of a Monte-Carlo functional: f(p) returns
// per-replicate values computed with common random numbers; replicates are
// differenced before averaging.
McEstimate finite_difference(
    const std::function<std::vector<double>(double)>& f, double p0, double h);

// Per-replicate building blocks, exposed for finite-difference checks that
// need common random numbers across parameter values.
std::vector<double> mi_replicates(const FinitePathPrior& prior,
                                  const ChannelParams& params,
                                  const IntensityMeasure& nu, long n_outer,
                                  std::uint64_t seed);
std::vector<double> marginal_loglik_replicates(const FinitePathPrior& prior,
                                               const ChannelParams& params,
                                               const IntensityMeasure& nu,
                                               long n_outer,
                                               std::uint64_t seed);
std::vector<double> mixture_mi_replicates(const FinitePathPrior& prior,
                                          const ChannelParams& params,
                                          const SwitchFunction& phi,
                                          long n_outer, std::uint64_t seed);

}  // namespace poischan::information
