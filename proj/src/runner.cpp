#include "poischan/runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <stdexcept>

#include <json.hpp>

#include "poischan/bayes.hpp"
#include "poischan/csv.hpp"
#include "poischan/information.hpp"
#include "poischan/malliavin.hpp"
#include "poischan/parallel.hpp"
#include "poischan/stats.hpp"

namespace poischan::cli {

namespace {

using json = nlohmann::ordered_json;
using bayes::FinitePathPrior;
using bayes::FiniteScalarPrior;
using channels::ChannelParams;
using channels::IntensityPath;
using channels::MixtureObservation;
using channels::SwitchFunction;
using information::DerivativeReport;
using io::CsvDocument;
using point_process::IntensityMeasure;
using point_process::PointConfiguration;
using point_process::TimeGrid;

constexpr std::uint64_t kSubObservation = 101;
constexpr std::uint64_t kSubPriorSampler = 102;
constexpr std::uint64_t kSubChecks = 103;

struct ScenarioOutput {
  CsvDocument csv;
  json summary;
  std::vector<CheckResult> checks;
};

std::string fmt(double v) { return io::format_double(v); }

FiniteScalarPrior scalar_prior(const ExperimentConfig& c) {
  return FiniteScalarPrior(c.prior.levels, c.prior.weights);
}

FinitePathPrior path_prior(const ExperimentConfig& c, const TimeGrid& grid,
                           std::uint64_t seed) {
  if (c.prior.kind == "levels")
    return bayes::constant_path_prior(scalar_prior(c), grid);
  if (c.prior.kind == "markov") {
    const bayes::PathPriorSampler sampler{
        .kind = bayes::PathPriorSampler::Kind::TwoStateMarkov,
        .grid = grid,
        .levels = {},
        .level_weights = {},
        .level0 = c.prior.level0,
        .level1 = c.prior.level1,
        .rate01 = c.prior.rate01,
        .rate10 = c.prior.rate10,
        .seed = RngStream(seed).substream(kSubPriorSampler).key()};
    return bayes::sample_prior_paths(sampler,
                                     static_cast<int>(c.mc.n_prior));
  }
  std::vector<IntensityPath> members;
  std::vector<double> weights;
  for (std::size_t i = 0; i < c.prior.member_values.size(); ++i) {
    members.emplace_back(grid, c.prior.member_values[i]);
    weights.push_back(c.prior.member_weights[i]);
  }
  return FinitePathPrior(std::move(members), std::move(weights));
}

double derivative_step(const ExperimentConfig& c, double parameter) {
  return c.deriv.h > 0.0 ? c.deriv.h : 1e-3 * parameter;
}

void derivative_row(CsvDocument& csv, const DerivativeReport& r) {
  csv.row({r.param, fmt(r.formula), fmt(r.formula), fmt(r.fd),
           fmt(r.formula_se), fmt(r.fd_se), fmt(r.step), r.pass ? "1" : "0"});
}

json derivative_json(const DerivativeReport& r) {
  return json{{"param", r.param},
              {"formula", r.formula},
              {"formula_stderr", r.formula_se},
              {"fd", r.fd},
              {"fd_stderr", r.fd_se},
              {"step", r.step},
              {"fd_half_step", r.fd_half},
              {"richardson", r.richardson},
              {"tolerance", r.tolerance},
              {"pass", r.pass}};
}

std::vector<std::string> derivative_header() {
  return {"param",          "value", "formula", "fd",
          "stderr_formula", "stderr_fd", "h", "pass"};
}

ScenarioOutput run_discrete_estimate(const ExperimentConfig& c,
                                     std::uint64_t) {
  const FiniteScalarPrior prior = scalar_prior(c);
  const long y_max =
      channels::truncation_count(c.lambda + c.alpha * prior.max_atom());
  ScenarioOutput out;
  out.csv.header({"y", "estimate_lemma", "estimate_enumeration", "abs_diff"});
  double worst = 0.0;
  for (long y = 0; y <= y_max; ++y) {
    const double lemma =
        bayes::conditional_mean_discrete(y, prior, c.lambda, c.alpha);
    const double oracle =
        bayes::conditional_mean_enumeration(y, prior, c.lambda, c.alpha);
    const double diff = std::fabs(lemma - oracle);
    worst = std::max(worst, diff);
    out.csv.row({std::to_string(y), fmt(lemma), fmt(oracle), fmt(diff)});
  }
  out.csv.metadata("y_max", std::to_string(y_max));
  const bool pass = worst <= 1e-12;
  out.checks.push_back({"discrete-lemma-vs-enumeration", pass});
  out.summary = json{{"y_max", y_max},
                     {"max_abs_diff", worst},
                     {"tolerance", 1e-12},
                     {"pass", pass}};
  return out;
}

void posterior_csv(ScenarioOutput& out, const bayes::PosteriorReport& report,
                   const IntensityPath* truth) {
  out.csv.header({"s", "estimate_gradient", "estimate_oracle", "abs_diff",
                  "true_value_if_known"});
  for (std::size_t j = 0; j < report.s.size(); ++j) {
    const double diff =
        std::fabs(report.estimate_gradient[j] - report.estimate_oracle[j]);
    out.csv.row({fmt(report.s[j]), fmt(report.estimate_gradient[j]),
                 fmt(report.estimate_oracle[j]), fmt(diff),
                 truth ? fmt(truth->value(static_cast<int>(j))) : ""});
  }
  out.csv.metadata("ess", fmt(report.ess));
  out.csv.metadata("n_members", std::to_string(report.n_members));
}

json posterior_json(const bayes::PosteriorReport& report, bool pass) {
  return json{{"n_members", report.n_members},
              {"ess", report.ess},
              {"ess_warning", report.ess_warning},
              {"max_scaled_gradient_oracle_diff", report.max_abs_diff},
              {"tolerance", 1e-10},
              {"cumulative_final", report.cumulative.empty()
                                       ? 0.0
                                       : report.cumulative.back()},
              {"pass", pass}};
}

ScenarioOutput run_path_estimate(const ExperimentConfig& c,
                                 std::uint64_t seed) {
  const TimeGrid grid(c.horizon, c.cells);
  const IntensityMeasure nu = IntensityMeasure::uniform(grid, 1.0);
  const ChannelParams params(c.lambda, c.alpha);
  const FinitePathPrior prior = path_prior(c, grid, seed);
  const RngStream root(seed);

  PointConfiguration y;
  const IntensityPath* truth = nullptr;
  int truth_member = -1;
  if (c.observation.jumps_present) {
    y = PointConfiguration(c.observation.jumps, c.horizon);
  } else {
    const RngStream obs_stream = root.substream(kSubObservation);
    RngStream pick = obs_stream.substream(0);
    truth_member = draw_index(prior.weights(), pick.uniform());
    y = channels::path_sample(prior.member(truth_member), params,
                              obs_stream.substream(1));
    truth = &prior.member(truth_member);
  }

  const bayes::PosteriorReport report =
      bayes::conditional_mean_gradient(y, prior, params, nu);
  ScenarioOutput out;
  posterior_csv(out, report, truth);
  out.csv.metadata("observed_atoms", std::to_string(y.count()));
  const bool pass = report.max_abs_diff <= 1e-10;
  out.checks.push_back({"gradient-vs-weighting-identity", pass});
  out.summary = posterior_json(report, pass);
  out.summary["observed_atoms"] = y.count();
  if (truth_member >= 0) out.summary["simulated_member"] = truth_member;
  return out;
}

ScenarioOutput run_mixture_estimate(const ExperimentConfig& c,
                                    std::uint64_t seed) {
  const TimeGrid grid(c.horizon, c.cells);
  const ChannelParams params(c.lambda, c.alpha);
  const SwitchFunction phi(grid, c.phi.mask);
  const FinitePathPrior prior = path_prior(c, grid, seed);
  const RngStream root(seed);

  MixtureObservation obs;
  const IntensityPath* truth = nullptr;
  int truth_member = -1;
  if (c.observation.jumps_present) {
    obs.jumps = PointConfiguration(c.observation.jumps, c.horizon);
    obs.gaussian_increments.assign(grid.cells(), 0.0);
    std::size_t next = 0;
    for (int j = 0; j < grid.cells(); ++j)
      if (!phi.poisson_cell(j))
        obs.gaussian_increments[j] = c.observation.gaussian[next++];
  } else {
    const RngStream obs_stream = root.substream(kSubObservation);
    RngStream pick = obs_stream.substream(0);
    truth_member = draw_index(prior.weights(), pick.uniform());
    obs = channels::mixture_sample(prior.member(truth_member), params, phi,
                                   obs_stream.substream(1));
    truth = &prior.member(truth_member);
  }

  const bayes::PosteriorReport report =
      bayes::conditional_mean_mixture(obs, prior, params, phi);
  ScenarioOutput out;
  posterior_csv(out, report, truth);
  out.csv.metadata("observed_jumps", std::to_string(obs.jumps.count()));
  const bool pass = report.max_abs_diff <= 1e-10;
  out.checks.push_back({"mixture-gradient-vs-weighting-identity", pass});
  out.summary = posterior_json(report, pass);
  out.summary["observed_jumps"] = obs.jumps.count();
  if (truth_member >= 0) out.summary["simulated_member"] = truth_member;
  return out;
}

ScenarioOutput run_mi(const ExperimentConfig& c, std::uint64_t seed) {
  const TimeGrid grid(c.horizon, c.cells);
  const IntensityMeasure nu = IntensityMeasure::uniform(grid, 1.0);
  const ChannelParams params(c.lambda, c.alpha);
  const FinitePathPrior prior = path_prior(c, grid, seed);
  const information::MIEstimate est = information::mutual_information_poisson(
      prior, params, nu, c.mc.n_outer, seed);
  ScenarioOutput out;
  out.csv.header(
      {"value", "stderr", "n_outer", "e_log_likelihood", "e_log_marginal"});
  out.csv.row({fmt(est.value), fmt(est.se), std::to_string(est.n_outer),
               fmt(est.e_log_likelihood), fmt(est.e_log_marginal)});
  const bool pass = est.value >= -4.0 * est.se;
  out.checks.push_back({"mi-nonnegative-within-stderr", pass});
  out.summary = json{{"value", est.value},
                     {"stderr", est.se},
                     {"n_outer", est.n_outer},
                     {"e_log_likelihood", est.e_log_likelihood},
                     {"e_log_marginal", est.e_log_marginal},
                     {"pass", pass}};
  return out;
}

ScenarioOutput run_debruijn(const ExperimentConfig& c, std::uint64_t seed) {
  const TimeGrid grid(c.horizon, c.cells);
  const IntensityMeasure nu = IntensityMeasure::uniform(grid, 1.0);
  const ChannelParams params(c.lambda, c.alpha);
  const FinitePathPrior prior = path_prior(c, grid, seed);
  ScenarioOutput out;
  out.csv.header(derivative_header());
  out.summary = json{{"reports", json::array()}};
  auto one = [&](const std::string& param) {
    const bool is_alpha = param == "alpha";
    const double p0 = is_alpha ? c.alpha : c.lambda;
    const double h = derivative_step(c, p0);
    const information::McEstimate formula =
        is_alpha ? information::debruijn_dalpha(prior, params, nu,
                                                c.mc.n_outer, seed)
                 : information::debruijn_dlambda(prior, params, nu,
                                                 c.mc.n_outer, seed);
    const information::McEstimate fd = information::finite_difference(
        [&](double p) {
          const ChannelParams moved(is_alpha ? c.lambda : p,
                                    is_alpha ? p : c.alpha);
          return information::marginal_loglik_replicates(
              prior, moved, nu, c.mc.n_outer, seed);
        },
        p0, h);
    const double tol =
        std::max(4.0 * std::hypot(formula.se, fd.se), 5e-3);
    const bool pass = std::fabs(formula.value - fd.value) <= tol;
    out.csv.row({param, fmt(formula.value), fmt(formula.value), fmt(fd.value),
                 fmt(formula.se), fmt(fd.se), fmt(h), pass ? "1" : "0"});
    out.checks.push_back({"debruijn-d" + param + "-vs-fd", pass});
    out.summary["reports"].push_back(json{{"param", param},
                                          {"formula", formula.value},
                                          {"formula_stderr", formula.se},
                                          {"fd", fd.value},
                                          {"fd_stderr", fd.se},
                                          {"step", h},
                                          {"tolerance", tol},
                                          {"pass", pass}});
  };
  if (c.deriv.param != "lambda") one("alpha");
  if (c.deriv.param != "alpha") one("lambda");
  return out;
}

ScenarioOutput run_mi_derivative(const ExperimentConfig& c,
                                 std::uint64_t seed) {
  const TimeGrid grid(c.horizon, c.cells);
  const IntensityMeasure nu = IntensityMeasure::uniform(grid, 1.0);
  const ChannelParams params(c.lambda, c.alpha);
  const FinitePathPrior prior = path_prior(c, grid, seed);
  ScenarioOutput out;
  out.csv.header(derivative_header());
  out.summary = json{{"reports", json::array()}};
  // Constant-level priors on a unit horizon collapse to the scalar channel;
  // an exact truncated-sum MI then cross-checks the fd column.
  const bool scalar_equivalent =
      c.prior.kind == "levels" && c.horizon == 1.0;
  auto one = [&](const std::string& param) {
    const bool is_alpha = param == "alpha";
    const double p0 = is_alpha ? c.alpha : c.lambda;
    const double h = derivative_step(c, p0);
    const DerivativeReport r =
        is_alpha ? information::mi_dalpha(prior, params, nu, c.mc.n_outer,
                                          seed, h)
                 : information::mi_dlambda(prior, params, nu, c.mc.n_outer,
                                           seed, h);
    derivative_row(out.csv, r);
    out.checks.push_back({"mi-d" + param + "-vs-fd", r.pass});
    json entry = derivative_json(r);
    if (scalar_equivalent) {
      const FiniteScalarPrior sp = scalar_prior(c);
      const double up = information::mutual_information_discrete_exact(
          sp, is_alpha ? c.lambda : c.lambda + h,
          is_alpha ? c.alpha + h : c.alpha);
      const double down = information::mutual_information_discrete_exact(
          sp, is_alpha ? c.lambda : c.lambda - h,
          is_alpha ? c.alpha - h : c.alpha);
      const double fd_exact = (up - down) / (2.0 * h);
      const double tol = std::max(1e-4, 4.0 * r.formula_se);
      const bool pass = std::fabs(r.formula - fd_exact) <= tol;
      out.checks.push_back({"mi-d" + param + "-vs-exact-scalar-fd", pass});
      entry["fd_exact_scalar"] = fd_exact;
      entry["exact_tolerance"] = tol;
      entry["exact_pass"] = pass;
    }
    out.summary["reports"].push_back(std::move(entry));
  };
  if (c.deriv.param != "lambda") one("alpha");
  if (c.deriv.param != "alpha") one("lambda");
  return out;
}

ScenarioOutput run_mixture_derivative(const ExperimentConfig& c,
                                      std::uint64_t seed) {
  const TimeGrid grid(c.horizon, c.cells);
  const ChannelParams params(c.lambda, c.alpha);
  const SwitchFunction phi(grid, c.phi.mask);
  const FinitePathPrior prior = path_prior(c, grid, seed);
  ScenarioOutput out;
  out.csv.header(derivative_header());
  out.summary = json{{"reports", json::array()}};
  auto one = [&](const std::string& param) {
    const bool is_alpha = param == "alpha";
    const double p0 = is_alpha ? c.alpha : c.lambda;
    const double h = derivative_step(c, p0);
    const DerivativeReport r =
        is_alpha ? information::mixture_mi_dalpha(prior, params, phi,
                                                  c.mc.n_outer, seed, h)
                 : information::mixture_mi_dlambda(prior, params, phi,
                                                   c.mc.n_outer, seed, h);
    derivative_row(out.csv, r);
    out.checks.push_back({"mixture-mi-d" + param + "-vs-fd", r.pass});
    out.summary["reports"].push_back(derivative_json(r));
  };
  if (c.deriv.param != "lambda") one("alpha");
  if (c.deriv.param != "alpha") one("lambda");
  return out;
}

ScenarioOutput run_operator_checks(const ExperimentConfig& c,
                                   std::uint64_t seed) {
  const TimeGrid grid(c.horizon, c.cells);
  const IntensityMeasure nu = IntensityMeasure::uniform(grid, 1.0);
  const ChannelParams params(c.lambda, c.alpha);
  const FinitePathPrior prior = path_prior(c, grid, seed);
  const IntensityPath& x0 = prior.member(0);
  const RngStream root = RngStream(seed).substream(kSubChecks);
  const long n = c.mc.n_outer;
  ScenarioOutput out;
  out.csv.header({"check", "lhs", "rhs", "abs_error", "threshold", "pass"});
  out.summary = json{{"checks", json::array()}};
  auto record = [&](const std::string& name, double lhs, double rhs,
                    double threshold) {
    const double err = std::fabs(lhs - rhs);
    const bool pass = err <= threshold;
    out.csv.row({name, fmt(lhs), fmt(rhs), fmt(err), fmt(threshold),
                 pass ? "1" : "0"});
    out.checks.push_back({name, pass});
    out.summary["checks"].push_back(json{{"name", name},
                                         {"lhs", lhs},
                                         {"rhs", rhs},
                                         {"abs_error", err},
                                         {"threshold", threshold},
                                         {"pass", pass}});
  };

  {  // Product rule for the add-one-atom difference, random quadratics in
     // the atom count.
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      RngStream sub = root.substream(1000 + static_cast<std::uint64_t>(i));
      const PointConfiguration y = sample_poisson(nu, sub.substream(0));
      RngStream coeff = sub.substream(1);
      double cf[3], cg[3];
      for (auto& v : cf) v = coeff.uniform() - 0.5;
      for (auto& v : cg) v = coeff.uniform() - 0.5;
      auto poly = [](const double* co) {
        return [co](const PointConfiguration& p) {
          const double m = static_cast<double>(p.count());
          return co[0] + co[1] * m + co[2] * m * m;
        };
      };
      const double z = grid.horizon() * coeff.uniform();
      worst = std::max(
          worst, std::fabs(malliavin::chain_rule_residual(poly(cf), poly(cg),
                                                          y, z)));
    }
    record("chain-rule-residual", worst, 0.0, 1e-10);
  }

  {  // Integration by parts, five functional / weight pairs.
    using malliavin::Functional;
    const double T = grid.horizon();
    std::vector<std::pair<Functional, std::function<double(double)>>> pairs;
    pairs.emplace_back(
        [](const PointConfiguration& y) {
          return static_cast<double>(y.count());
        },
        [](double) { return 1.0; });
    pairs.emplace_back(
        [](const PointConfiguration& y) {
          const double m = static_cast<double>(y.count());
          return m * m;
        },
        [](double s) { return s; });
    pairs.emplace_back(
        [](const PointConfiguration& y) {
          return point_process::stieltjes_integral(
              [](double s) { return s * s; }, y);
        },
        [](double) { return 1.0; });
    pairs.emplace_back(
        [](const PointConfiguration& y) {
          return std::exp(-static_cast<double>(y.count()));
        },
        [T](double s) { return s < 0.5 * T ? 1.0 : 0.0; });
    pairs.emplace_back(
        [](const PointConfiguration& y) {
          return static_cast<double>(y.count()) +
                 point_process::stieltjes_integral([](double s) { return s; },
                                                   y);
        },
        [](double s) { return 1.0 + s; });
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto check = malliavin::ibp_check(
          pairs[i].first, pairs[i].second, nu, static_cast<int>(n),
          root.substream(2000 + i).key());
      record("ibp-pair-" + std::to_string(i + 1), check.lhs, check.rhs,
             4.0 * check.diff_se);
    }
  }

  {  // Reference-measure normalization of the likelihood.
    const RngStream gr = root.substream(3000);
    std::vector<double> w(n);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
      const PointConfiguration y = sample_poisson(nu, gr.substream(i));
      w[i] = std::exp(channels::log_likelihood_path(y, x0, params, nu));
    });
    const MeanStderr m = mean_stderr(w);
    record("likelihood-normalization", m.mean, 1.0, 4.0 * m.se);
  }

  {  // Add-one-atom action on the likelihood itself.
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      RngStream sub = root.substream(4000 + static_cast<std::uint64_t>(i));
      const PointConfiguration y = sample_poisson(nu, sub.substream(0));
      RngStream pick = sub.substream(1);
      const double z =
          malliavin::evaluation_point(grid, grid.cell_of(grid.horizon() *
                                                         pick.uniform()),
                                      y);
      const double L =
          std::exp(channels::log_likelihood_path(y, x0, params, nu));
      const auto F = [&](const PointConfiguration& p) {
        return std::exp(channels::log_likelihood_path(p, x0, params, nu));
      };
      const double got = malliavin::difference(F, y, z);
      const double expected =
          L * (params.lambda - 1.0 + params.alpha * x0.value_at(z));
      const double scale = std::max({1.0, std::fabs(expected), L});
      worst = std::max(worst, std::fabs(got - expected) / scale);
    }
    record("difference-of-likelihood-identity", worst, 0.0, 1e-10);
  }

  return out;
}

}  // namespace

RunManifest run(const ExperimentConfig& config, const RunOptions& options) {
  {
    const std::vector<std::string> diagnostics = validate(config);
    if (!diagnostics.empty())
      throw std::invalid_argument("invalid config: " + diagnostics.front());
  }
  const std::uint64_t seed = options.seed.value_or(config.mc.seed);
  const std::string out_dir = options.out_dir.value_or(config.output_dir);

  const auto t0 = std::chrono::steady_clock::now();
  ScenarioOutput so;
  if (config.scenario == "discrete-estimate")
    so = run_discrete_estimate(config, seed);
  else if (config.scenario == "path-estimate")
    so = run_path_estimate(config, seed);
  else if (config.scenario == "mixture-estimate")
    so = run_mixture_estimate(config, seed);
  else if (config.scenario == "mi")
    so = run_mi(config, seed);
  else if (config.scenario == "debruijn")
    so = run_debruijn(config, seed);
  else if (config.scenario == "mi-derivative")
    so = run_mi_derivative(config, seed);
  else if (config.scenario == "mixture-derivative")
    so = run_mixture_derivative(config, seed);
  else if (config.scenario == "operator-checks")
    so = run_operator_checks(config, seed);
  else
    throw std::invalid_argument("invalid config: scenario unknown");
  const auto t1 = std::chrono::steady_clock::now();

  RunManifest manifest;
  manifest.config_hash = io::hex64(io::fnv1a64(config.raw_text));
  manifest.seed = seed;
  manifest.scenario = config.scenario;
  manifest.wall_seconds =
      std::chrono::duration<double>(t1 - t0).count();
  manifest.checks = so.checks;
  manifest.all_pass = true;
  for (const auto& check : so.checks) manifest.all_pass &= check.pass;

  so.csv.metadata("config_hash", manifest.config_hash);
  so.csv.metadata("seed", std::to_string(seed));
  so.csv.metadata("tool_version",
                  std::string(kToolName) + " " + kToolVersion);
  so.csv.metadata("scenario", config.scenario);

  so.summary["scenario"] = config.scenario;
  so.summary["config_hash"] = manifest.config_hash;
  so.summary["seed"] = seed;
  so.summary["tool_version"] = std::string(kToolName) + " " + kToolVersion;

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec)
    throw std::runtime_error("cannot create output directory: " + out_dir);

  const std::string csv_name = config.scenario + ".csv";
  const std::string json_name = config.scenario + ".json";
  io::atomic_write_file(std::filesystem::path(out_dir) / csv_name,
                        so.csv.str());
  io::atomic_write_file(std::filesystem::path(out_dir) / json_name,
                        so.summary.dump(2) + "\n");
  manifest.artifacts = {csv_name, json_name};

  json mj{{"tool", kToolName},
          {"version", kToolVersion},
          {"config_hash", manifest.config_hash},
          {"seed", manifest.seed},
          {"scenario", manifest.scenario},
          {"wall_seconds", manifest.wall_seconds},
          {"worker_threads", worker_threads()},
          {"artifacts", manifest.artifacts},
          {"all_pass", manifest.all_pass}};
  mj["checks"] = json::array();
  for (const auto& check : manifest.checks)
    mj["checks"].push_back(json{{"name", check.name}, {"pass", check.pass}});
  io::atomic_write_file(std::filesystem::path(out_dir) / "manifest.json",
                        mj.dump(2) + "\n");
  return manifest;
}

}  // namespace poischan::cli
