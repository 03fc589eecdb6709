#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "poischan/channels.hpp"
#include "poischan/malliavin.hpp"
#include "poischan/stats.hpp"

using namespace poischan;
using namespace poischan::channels;

TEST_CASE("channel parameters are validated") {
  CHECK_THROWS_AS(ChannelParams(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ChannelParams(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(ChannelParams(-2.0, 1.0), std::invalid_argument);
}

TEST_CASE("scalar log-density values and normalization") {
  // lambda=1, alpha=1, x=1: density relative to the unit Poisson law is
  // exp(-1) 2^y, so log at y=0 is -1 and at y=3 is -1 + 3 log 2.
  CHECK(discrete_log_density(0, 1.0, 1.0, 1.0) ==
        doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(discrete_log_density(3, 1.0, 1.0, 1.0) ==
        doctest::Approx(-1.0 + 3.0 * std::log(2.0)).epsilon(1e-15));
  // summing density * unit-Poisson pmf over y recovers a probability law
  for (const double x : {0.0, 0.7, 2.3}) {
    const double lambda = 1.4, alpha = 0.8;
    const long y_max = truncation_count(lambda + alpha * x) + 10;
    double total = 0.0;
    for (long y = 0; y <= y_max; ++y) {
      const double log_ref = -1.0 - std::lgamma(static_cast<double>(y) + 1.0);
      total += std::exp(discrete_log_density(y, x, lambda, alpha) + log_ref);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("scalar sampler matches the channel mean") {
  const int n = 100000;
  const RngStream root(555);
  std::vector<double> draws(n);
  for (int i = 0; i < n; ++i)
    draws[i] = static_cast<double>(
        discrete_sample(1.5, 2.0, 0.5, root.substream(i)));
  const MeanStderr m = mean_stderr(draws);
  CHECK(std::fabs(m.mean - 2.75) <= 4.0 * m.se);
}

TEST_CASE("path log-likelihood closed-form values") {
  const TimeGrid grid(1.0, 8);
  const IntensityMeasure nu = IntensityMeasure::uniform(grid, 1.0);
  const IntensityPath x = IntensityPath::constant(grid, 1.0);
  const ChannelParams p(1.0, 1.0);
  // one atom, unit signal: log L = log(2) - 1
  const PointConfiguration y({0.5}, 1.0);
  CHECK(log_likelihood_path(y, x, p, nu) ==
        doctest::Approx(std::log(2.0) - 1.0).epsilon(1e-14));
  // empty observation: log L = -(lambda - 1) T - alpha * integral(x)
  const PointConfiguration empty({}, 1.0);
  const ChannelParams q(1.7, 0.6);
  const IntensityPath c = IntensityPath::constant(grid, 0.9);
  CHECK(log_likelihood_path(empty, c, q, nu) ==
        doctest::Approx(-(1.7 - 1.0) - 0.6 * 0.9).epsilon(1e-14));
}

TEST_CASE("likelihood is normalized under the reference law") {
  const TimeGrid grid(1.0, 8);
  const IntensityMeasure nu = IntensityMeasure::uniform(grid, 1.0);
  const TimeGrid g2 = grid;
  std::vector<double> vals;
  for (int j = 0; j < 8; ++j) vals.push_back(0.2 + 0.15 * j);
  const IntensityPath x(g2, vals);
  const ChannelParams p(1.3, 0.8);
  const RngStream root(6060);
  const int n = 200000;
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i)
    w[i] = std::exp(
        log_likelihood_path(sample_poisson(nu, root.substream(i)), x, p, nu));
  const MeanStderr m = mean_stderr(w);
  CHECK(std::fabs(m.mean - 1.0) <= 4.0 * m.se);
}

TEST_CASE("likelihood derivatives match finite differences") {
  const TimeGrid grid(1.0, 8);
  const IntensityMeasure nu = IntensityMeasure::uniform(grid, 1.0);
  std::vector<double> vals;
  for (int j = 0; j < 8; ++j) vals.push_back(1.8 - 0.2 * j);
  const IntensityPath x(grid, vals);
  const PointConfiguration y({0.12, 0.5, 0.51, 0.93}, 1.0);
  const ChannelParams p(1.2, 0.9);
  const double h = 1e-6;
  const double fd_alpha =
      (log_likelihood_path(y, x, ChannelParams(1.2, 0.9 + h), nu) -
       log_likelihood_path(y, x, ChannelParams(1.2, 0.9 - h), nu)) /
      (2.0 * h);
  const double fd_lambda =
      (log_likelihood_path(y, x, ChannelParams(1.2 + h, 0.9), nu) -
       log_likelihood_path(y, x, ChannelParams(1.2 - h, 0.9), nu)) /
      (2.0 * h);
  CHECK(dlogl_dalpha(y, x, p, nu) ==
        doctest::Approx(fd_alpha).epsilon(1e-8));
  CHECK(dlogl_dlambda(y, x, p, nu) ==
        doctest::Approx(fd_lambda).epsilon(1e-8));
}

TEST_CASE("one-atom action on the likelihood") {
  // D_z L = (lambda - 1 + alpha x(z)) L, the identity driving the posterior
  // gradient route.
  const TimeGrid grid(1.0, 8);
  const IntensityMeasure nu = IntensityMeasure::uniform(grid, 1.0);
  std::vector<double> vals;
  for (int j = 0; j < 8; ++j) vals.push_back(0.3 + 0.2 * j);
  const IntensityPath x(grid, vals);
  const ChannelParams p(1.4, 0.7);
  const PointConfiguration y({0.21, 0.84}, 1.0);
  const malliavin::Functional L = [&](const PointConfiguration& q) {
    return std::exp(log_likelihood_path(q, x, p, nu));
  };
  for (const double z : {0.05, 0.4, 0.97}) {
    const double got = malliavin::difference(L, y, z);
    const double expect =
        L(y) * (p.lambda - 1.0 + p.alpha * x.value_at(z));
    CHECK(got == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("path sampler matches its intensity") {
  const TimeGrid grid(1.0, 8);
  const IntensityPath x = IntensityPath::constant(grid, 1.5);
  const ChannelParams p(1.0, 2.0);
  const RngStream root(8181);
  const int n = 100000;
  std::vector<double> counts(n);
  for (int i = 0; i < n; ++i)
    counts[i] =
        static_cast<double>(path_sample(x, p, root.substream(i)).count());
  const MeanStderr m = mean_stderr(counts);
  CHECK(std::fabs(m.mean - 4.0) <= 4.0 * m.se);
}

TEST_CASE("switch function validates and classifies cells") {
  const TimeGrid grid(1.0, 4);
  const SwitchFunction phi(grid, {1, 0, 0, 1});
  CHECK(phi.poisson_cell(0));
  CHECK(!phi.poisson_cell(1));
  CHECK(!phi.all_poisson());
  CHECK(!phi.all_gaussian());
  CHECK(SwitchFunction::constant(grid, true).all_poisson());
  CHECK(SwitchFunction::constant(grid, false).all_gaussian());
  CHECK_THROWS_AS(SwitchFunction(grid, {1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(SwitchFunction(grid, {1, 2, 0, 0}), std::invalid_argument);
}

TEST_CASE("mixture consistency rejects jumps in diffusion cells") {
  const TimeGrid grid(1.0, 4);
  const SwitchFunction phi(grid, {1, 0, 1, 0});
  MixtureObservation ok;
  ok.jumps = PointConfiguration({0.1, 0.6}, 1.0);
  ok.gaussian_increments = {0.0, 0.3, 0.0, -0.2};
  CHECK_NOTHROW(check_mixture_consistent(ok, phi));
  MixtureObservation bad = ok;
  bad.jumps = PointConfiguration({0.3}, 1.0);  // cell 1 is diffusion
  CHECK_THROWS_AS(check_mixture_consistent(bad, phi),
                  std::invalid_argument);
  MixtureObservation wrong_size = ok;
  wrong_size.gaussian_increments = {0.0, 0.3};
  CHECK_THROWS_AS(check_mixture_consistent(wrong_size, phi),
                  std::invalid_argument);
}

TEST_CASE("all-counting switch reproduces the pure channel bit for bit") {
  const TimeGrid grid(1.0, 16);
  const IntensityMeasure nu = IntensityMeasure::uniform(grid, 1.0);
  std::vector<double> vals;
  for (int j = 0; j < 16; ++j) vals.push_back(0.4 + 0.1 * j);
  const IntensityPath x(grid, vals);
  const ChannelParams p(1.25, 0.75);
  const SwitchFunction phi = SwitchFunction::constant(grid, true);
  const RngStream s(90125);

  const PointConfiguration pure = path_sample(x, p, s);
  const MixtureObservation mixed = mixture_sample(x, p, phi, s);
  REQUIRE(mixed.jumps.count() == pure.count());
  for (long k = 0; k < pure.count(); ++k)
    CHECK(mixed.jumps.times()[k] == pure.times()[k]);
  for (double g : mixed.gaussian_increments) CHECK(g == 0.0);

  CHECK(log_likelihood_mixture(mixed, x, p, phi) ==
        log_likelihood_path(pure, x, p, nu));
}

TEST_CASE("mixture diffusion increments match the drift law") {
  const TimeGrid grid(1.0, 4);
  const IntensityPath x = IntensityPath::constant(grid, 2.0);
  const ChannelParams p(1.5, 1.0);
  const SwitchFunction phi = SwitchFunction::constant(grid, false);
  const RngStream root(777);
  const int n = 100000;
  const double dt = grid.dt();
  const double drift = (1.5 - 1.0 + 1.0 * 2.0) * dt;  // per-cell mean
  std::vector<double> g0(n), g0sq(n);
  for (int i = 0; i < n; ++i) {
    const MixtureObservation obs = mixture_sample(x, p, phi, root.substream(i));
    CHECK(obs.jumps.count() == 0);
    g0[i] = obs.gaussian_increments[0];
    g0sq[i] = (obs.gaussian_increments[0] - drift) *
              (obs.gaussian_increments[0] - drift);
  }
  const MeanStderr m = mean_stderr(g0);
  const MeanStderr v = mean_stderr(g0sq);
  CHECK(std::fabs(m.mean - drift) <= 4.0 * m.se);
  CHECK(std::fabs(v.mean - dt) <= 4.0 * v.se);
}

TEST_CASE("mixture likelihood is normalized over both segments") {
  // E[L] = 1 when the observation is drawn from the lambda=1, alpha*x=0
  // reference law: unit-rate Poisson on counting cells, driftless Brownian
  // increments on diffusion cells.
  const TimeGrid grid(1.0, 8);
  const SwitchFunction phi(grid, {1, 0, 1, 0, 1, 0, 1, 0});
  std::vector<double> vals;
  for (int j = 0; j < 8; ++j) vals.push_back(0.25 + 0.15 * j);
  const IntensityPath x(grid, vals);
  const IntensityPath zero = IntensityPath::constant(grid, 0.0);
  const ChannelParams ref(1.0, 1.0);
  const ChannelParams p(1.35, 0.85);
  const RngStream root(31337);
  const int n = 200000;
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) {
    const MixtureObservation obs =
        mixture_sample(zero, ref, phi, root.substream(i));
    w[i] = std::exp(log_likelihood_mixture(obs, x, p, phi));
  }
  const MeanStderr m = mean_stderr(w);
  CHECK(std::fabs(m.mean - 1.0) <= 4.0 * m.se);
}

TEST_CASE("truncation count bounds the Poisson tail") {
  for (const double rate : {0.3, 2.0, 11.0}) {
    const long y_max = truncation_count(rate, 1e-12);
    // forward CDF at y_max using stable incremental pmf
    double pmf = std::exp(-rate), cdf = pmf;
    for (long y = 1; y <= y_max; ++y) {
      pmf *= rate / static_cast<double>(y);
      cdf += pmf;
    }
    CHECK(1.0 - cdf < 1e-12);
    CHECK(y_max < 200);
  }
}
