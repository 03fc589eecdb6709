#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "poischan/bayes.hpp"
#include "poischan/stats.hpp"

using namespace poischan;
using namespace poischan::bayes;

namespace {

FinitePathPrior random_levels_prior(const TimeGrid& grid, int members,
                                    RngStream coeff) {
  std::vector<IntensityPath> paths;
  std::vector<double> weights;
  for (int i = 0; i < members; ++i) {
    std::vector<double> vals(grid.cells());
    for (auto& v : vals) v = 0.05 + 3.95 * coeff.uniform();
    paths.emplace_back(grid, vals);
    weights.push_back(0.1 + coeff.uniform());
  }
  return FinitePathPrior(std::move(paths), std::move(weights));
}

}  // namespace

TEST_CASE("scalar prior normalizes weights") {
  const FiniteScalarPrior prior({0.0, 2.0}, {2.0, 6.0});
  CHECK(prior.weight(0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(prior.weight(1) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(prior.max_atom() == 2.0);
  CHECK_THROWS_AS(FiniteScalarPrior({1.0}, {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(FiniteScalarPrior({1.0, 2.0}, {1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(FiniteScalarPrior({-1.0}, {1.0}), std::invalid_argument);
}

TEST_CASE("scalar marginal closed form for the symmetric two-point prior") {
  // lambda=1, alpha=1, X in {0,1} with weight 1/2: relative to the unit
  // Poisson law, m(y) = 1/2 + (1/2) e^{-1} 2^y.
  for (long y = 0; y <= 12; ++y) {
    const FiniteScalarPrior prior({0.0, 1.0}, {0.5, 0.5});
    const double expect =
        0.5 + 0.5 * std::exp(-1.0) * std::pow(2.0, static_cast<double>(y));
    CHECK(marginal_discrete(y, prior, 1.0, 1.0) ==
          doctest::Approx(expect).epsilon(1e-13));
  }
}

TEST_CASE("scalar posterior mean closed form and enumeration agreement") {
  const FiniteScalarPrior prior({0.0, 1.0}, {0.5, 0.5});
  for (long y = 0; y <= 40; ++y) {
    const double lemma = conditional_mean_discrete(y, prior, 1.0, 1.0);
    const double oracle = conditional_mean_enumeration(y, prior, 1.0, 1.0);
    const double closed =
        1.0 / (1.0 + std::exp(1.0) * std::pow(2.0, -static_cast<double>(y)));
    CHECK(std::fabs(lemma - oracle) <= 1e-12);
    CHECK(lemma == doctest::Approx(closed).epsilon(1e-12));
  }
}

TEST_CASE("scalar posterior mean agreement on a random five-atom prior") {
  RngStream coeff(246);
  std::vector<double> atoms, weights;
  for (int i = 0; i < 5; ++i) {
    atoms.push_back(3.0 * coeff.uniform());
    weights.push_back(0.05 + coeff.uniform());
  }
  const FiniteScalarPrior prior(atoms, weights);
  for (long y = 0; y <= 40; ++y) {
    const double lemma = conditional_mean_discrete(y, prior, 1.0, 1.0);
    const double oracle = conditional_mean_enumeration(y, prior, 1.0, 1.0);
    CHECK(std::fabs(lemma - oracle) <= 1e-12);
  }
}

TEST_CASE("posterior mean is a tower-property average of the atoms") {
  // E[ E[X|Y] ] over the marginal law equals E[X]; checked by exact
  // truncated summation.
  const FiniteScalarPrior prior({0.3, 1.1, 2.4}, {0.5, 0.3, 0.2});
  const double lambda = 1.2, alpha = 0.7;
  const long y_max = 120;  // generous truncation for rate <= 2.88
  double acc = 0.0;
  for (long y = 0; y <= y_max; ++y) {
    double py = 0.0;  // absolute pmf of Y
    for (int i = 0; i < prior.size(); ++i) {
      const double rate = lambda + alpha * prior.atom(i);
      py += prior.weight(i) *
            std::exp(-rate + static_cast<double>(y) * std::log(rate) -
                     std::lgamma(static_cast<double>(y) + 1.0));
    }
    acc += py * conditional_mean_discrete(y, prior, lambda, alpha);
  }
  const double prior_mean = 0.5 * 0.3 + 0.3 * 1.1 + 0.2 * 2.4;
  CHECK(acc == doctest::Approx(prior_mean).epsilon(1e-12));
}

TEST_CASE("path marginal weights form a posterior") {
  const TimeGrid grid(1.0, 16);
  const IntensityMeasure nu = IntensityMeasure::uniform(grid, 1.0);
  const FinitePathPrior prior = random_levels_prior(grid, 6, RngStream(99));
  const ChannelParams params(1.1, 0.9);
  const PointConfiguration y({0.1, 0.33, 0.34, 0.9}, 1.0);
  const MarginalPath m = marginal_path(y, prior, params, nu);
  REQUIRE(static_cast<int>(m.weights.size()) == prior.size());
  double total = 0.0;
  for (double w : m.weights) {
    CHECK(w >= 0.0);
    total += w;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  // marginal value: log of the weight-averaged likelihood
  double direct = 0.0;
  for (int i = 0; i < prior.size(); ++i)
    direct += prior.weight(i) *
              std::exp(channels::log_likelihood_path(y, prior.member(i),
                                                     params, nu));
  CHECK(m.log_m == doctest::Approx(std::log(direct)).epsilon(1e-12));
}

TEST_CASE("gradient and weighting routes agree on random instances") {
  const TimeGrid grid(1.0, 32);
  const IntensityMeasure nu = IntensityMeasure::uniform(grid, 1.0);
  const RngStream root(1357);
  for (int rep = 0; rep < 20; ++rep) {
    RngStream sub = root.substream(rep);
    const int members = 2 + static_cast<int>(sub.uniform() * 15.0);
    const FinitePathPrior prior =
        random_levels_prior(grid, members, sub.substream(0));
    const ChannelParams params(0.5 + sub.uniform(), 0.5 + sub.uniform());
    RngStream pick = sub.substream(1);
    const int truth = draw_index(prior.weights(), pick.uniform());
    const PointConfiguration y =
        channels::path_sample(prior.member(truth), params, sub.substream(2));
    const PosteriorReport report =
        conditional_mean_gradient(y, prior, params, nu);
    CHECK(report.max_abs_diff <= 1e-10);
    const std::vector<double> oracle =
        conditional_mean_weighting(y, prior, params, nu);
    for (int j = 0; j < grid.cells(); ++j)
      CHECK(report.estimate_oracle[j] == oracle[j]);
  }
}

TEST_CASE("cumulative estimate integrates the pointwise estimate") {
  const TimeGrid grid(1.0, 32);
  const IntensityMeasure nu = IntensityMeasure::uniform(grid, 1.0);
  const FinitePathPrior prior = random_levels_prior(grid, 8, RngStream(11));
  const ChannelParams params(1.3, 0.7);
  const PointConfiguration y({0.08, 0.4, 0.77}, 1.0);
  const PosteriorReport report =
      conditional_mean_gradient(y, prior, params, nu);
  double acc = 0.0;
  for (int j = 0; j < grid.cells(); ++j) {
    acc += report.estimate_oracle[j] * grid.dt();
    CHECK(std::fabs(report.cumulative[j] - acc) <= 1e-12 * std::max(1.0, acc));
  }
}

TEST_CASE("posterior collapses to the prior for an empty likelihood ratio") {
  // With alpha*x identical across members the observation carries no
  // information: posterior weights equal prior weights.
  const TimeGrid grid(1.0, 8);
  const IntensityMeasure nu = IntensityMeasure::uniform(grid, 1.0);
  std::vector<IntensityPath> paths(3, IntensityPath::constant(grid, 1.0));
  const FinitePathPrior prior(std::move(paths), {0.2, 0.5, 0.3});
  const ChannelParams params(1.0, 1.0);
  const PointConfiguration y({0.2, 0.6}, 1.0);
  const MarginalPath m = marginal_path(y, prior, params, nu);
  CHECK(m.weights[0] == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(m.weights[1] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(m.weights[2] == doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("posterior depends on atoms only through their cells") {
  // Piecewise-constant signals cannot distinguish atom positions within a
  // cell: moving an atom inside its cell leaves every weight bit-identical.
  const TimeGrid grid(1.0, 8);
  const IntensityMeasure nu = IntensityMeasure::uniform(grid, 1.0);
  const FinitePathPrior prior = random_levels_prior(grid, 5, RngStream(3));
  const ChannelParams params(1.2, 0.8);
  const MarginalPath a =
      marginal_path(PointConfiguration({0.130, 0.72}, 1.0), prior, params, nu);
  const MarginalPath b =
      marginal_path(PointConfiguration({0.180, 0.70}, 1.0), prior, params, nu);
  CHECK(a.log_m == b.log_m);
  for (std::size_t i = 0; i < a.weights.size(); ++i)
    CHECK(a.weights[i] == b.weights[i]);
}

TEST_CASE("two-state Markov prior sampler hits its stationary mean") {
  const TimeGrid grid(1.0, 16);
  const PathPriorSampler sampler{.kind = PathPriorSampler::Kind::TwoStateMarkov,
                                 .grid = grid,
                                 .levels = {},
                                 .level_weights = {},
                                 .level0 = 0.0,
                                 .level1 = 1.0,
                                 .rate01 = 2.0,
                                 .rate10 = 1.0,
                                 .seed = 404};
  const int n = 10000;
  const FinitePathPrior prior = sample_prior_paths(sampler, n);
  REQUIRE(prior.size() == n);
  // stationary P(state 1) = rate01 / (rate01 + rate10) = 2/3
  std::vector<double> first(n), last(n);
  for (int i = 0; i < n; ++i) {
    first[i] = prior.member(i).value(0);
    last[i] = prior.member(i).value(15);
  }
  const MeanStderr mf = mean_stderr(first);
  const MeanStderr ml = mean_stderr(last);
  CHECK(std::fabs(mf.mean - 2.0 / 3.0) <= 4.0 * mf.se);
  CHECK(std::fabs(ml.mean - 2.0 / 3.0) <= 4.0 * ml.se);
  for (int i = 0; i < 50; ++i)
    for (double v : prior.member(i).values())
      CHECK((v == 0.0 || v == 1.0));
}

TEST_CASE("constant-level sampler draws from the marginal") {
  const TimeGrid grid(1.0, 4);
  const PathPriorSampler sampler{.kind = PathPriorSampler::Kind::ConstantLevel,
                                 .grid = grid,
                                 .levels = {0.5, 2.0},
                                 .level_weights = {0.25, 0.75},
                                 .level0 = 0.0,
                                 .level1 = 0.0,
                                 .rate01 = 0.0,
                                 .rate10 = 0.0,
                                 .seed = 31};
  const int n = 40000;
  const FinitePathPrior prior = sample_prior_paths(sampler, n);
  long hi = 0;
  for (int i = 0; i < n; ++i) {
    const double v = prior.member(i).value(0);
    CHECK((v == 0.5 || v == 2.0));
    for (int j = 1; j < 4; ++j) CHECK(prior.member(i).value(j) == v);
    if (v == 2.0) ++hi;
  }
  const double p = static_cast<double>(hi) / n;
  CHECK(std::fabs(p - 0.75) <= 4.0 * std::sqrt(0.25 * 0.75 / n));
}

TEST_CASE("mixture posterior agrees with a Gaussian closed form") {
  // All-diffusion switch with lambda=1 is a pure Gaussian-noise channel:
  // increments g_j ~ N(alpha x_j dt, dt). For a two-level constant prior
  // the posterior weight of level a is a softmax of the Gaussian
  // log-likelihoods, computable in closed form.
  const int M = 8;
  const TimeGrid grid(1.0, M);
  const SwitchFunction phi = SwitchFunction::constant(grid, false);
  const double a0 = 0.4, a1 = 2.1, alpha = 1.3;
  std::vector<IntensityPath> paths;
  paths.push_back(IntensityPath::constant(grid, a0));
  paths.push_back(IntensityPath::constant(grid, a1));
  const FinitePathPrior prior(std::move(paths), {0.35, 0.65});
  const ChannelParams params(1.0, alpha);

  MixtureObservation obs;
  obs.jumps = PointConfiguration({}, 1.0);
  obs.gaussian_increments.assign(M, 0.0);
  RngStream r(5150);
  const double dt = grid.dt();
  for (int j = 0; j < M; ++j)
    obs.gaussian_increments[j] =
        alpha * a1 * dt + std::sqrt(dt) * r.normal();

  const PosteriorReport report =
      conditional_mean_mixture(obs, prior, params, phi);

  // closed form: log w_i + sum_j [theta_i g_j - theta_i^2 dt / 2] with
  // theta_i = alpha a_i (the lambda-1 drift offset vanishes at lambda=1)
  double s0 = std::log(0.35), s1 = std::log(0.65);
  for (int j = 0; j < M; ++j) {
    const double g = obs.gaussian_increments[j];
    s0 += alpha * a0 * g - 0.5 * alpha * a0 * alpha * a0 * dt;
    s1 += alpha * a1 * g - 0.5 * alpha * a1 * alpha * a1 * dt;
  }
  const double w1 = 1.0 / (1.0 + std::exp(s0 - s1));
  const double post_mean = (1.0 - w1) * a0 + w1 * a1;
  for (int j = 0; j < M; ++j) {
    CHECK(std::fabs(report.estimate_oracle[j] - post_mean) <= 1e-10);
    CHECK(std::fabs(report.estimate_gradient[j] - post_mean) <= 1e-10);
  }
}

TEST_CASE("posterior reports flag weight collapse") {
  // An extreme observation concentrates the posterior on one member; the
  // effective sample size must reflect that.
  const TimeGrid grid(1.0, 8);
  const IntensityMeasure nu = IntensityMeasure::uniform(grid, 1.0);
  std::vector<IntensityPath> paths;
  paths.push_back(IntensityPath::constant(grid, 0.01));
  paths.push_back(IntensityPath::constant(grid, 8.0));
  const FinitePathPrior prior(std::move(paths), {0.5, 0.5});
  const ChannelParams params(1.0, 1.0);
  std::vector<double> jumps;
  for (int k = 0; k < 24; ++k) jumps.push_back(0.02 + 0.04 * k);
  const PosteriorReport report = conditional_mean_gradient(
      PointConfiguration(jumps, 1.0), prior, params, nu);
  CHECK(report.ess < 1.2);
  CHECK(report.estimate_oracle[0] > 7.9);
}
