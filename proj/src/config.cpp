#include "poischan/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace poischan::cli {

const char* const kScenarios[8] = {
    "discrete-estimate", "path-estimate",  "mixture-estimate",
    "mi",                "debruijn",       "mi-derivative",
    "mixture-derivative", "operator-checks"};

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool parse_double(const std::string& v, double& out) {
  const char* p = v.c_str();
  char* end = nullptr;
  out = std::strtod(p, &end);
  return end != p && *end == '\0' && std::isfinite(out);
}

bool parse_long(const std::string& v, long& out) {
  const char* p = v.c_str();
  char* end = nullptr;
  out = std::strtol(p, &end, 10);
  return end != p && *end == '\0';
}

bool parse_u64(const std::string& v, std::uint64_t& out) {
  if (v.empty() || v[0] == '-') return false;
  const char* p = v.c_str();
  char* end = nullptr;
  out = std::strtoull(p, &end, 10);
  return end != p && *end == '\0';
}

bool parse_double_list(const std::string& v, std::vector<double>& out) {
  out.clear();
  if (trim(v).empty()) return true;  // explicit empty list
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double x;
    if (!parse_double(trim(item), x)) return false;
    out.push_back(x);
  }
  return true;
}

// value:count pairs, e.g. "1:16,0:16".
bool parse_runs(const std::string& v, std::vector<std::uint8_t>& out) {
  out.clear();
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    const std::size_t colon = t.find(':');
    if (colon == std::string::npos) return false;
    long value, count;
    if (!parse_long(trim(t.substr(0, colon)), value) ||
        !parse_long(trim(t.substr(colon + 1)), count))
      return false;
    if ((value != 0 && value != 1) || count < 1) return false;
    out.insert(out.end(), static_cast<std::size_t>(count),
               static_cast<std::uint8_t>(value));
  }
  return !out.empty();
}

bool parse_mask(const std::string& v, std::vector<std::uint8_t>& out) {
  out.clear();
  for (char c : v) {
    if (c == '0')
      out.push_back(0);
    else if (c == '1')
      out.push_back(1);
    else
      return false;
  }
  return !out.empty();
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  c.raw_text = text;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      c.parse_errors.push_back("line " + std::to_string(line_no) +
                               ": expected key=value");
      continue;
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      c.parse_errors.push_back("line " + std::to_string(line_no) +
                               ": empty key");
      continue;
    }
    if (c.entries.count(key)) {
      c.parse_errors.push_back(key + ": duplicate key");
      continue;
    }
    c.entries[key] = value;
  }

  auto bad = [&](const std::string& key, const char* what) {
    c.parse_errors.push_back(key + ": " + what);
  };

  for (const auto& [key, value] : c.entries) {
    if (key == "scenario") {
      c.scenario = value;
    } else if (key == "channel.lambda") {
      if (!parse_double(value, c.lambda)) bad(key, "not a number");
    } else if (key == "channel.alpha") {
      if (!parse_double(value, c.alpha)) bad(key, "not a number");
    } else if (key == "channel.T") {
      if (!parse_double(value, c.horizon)) bad(key, "not a number");
    } else if (key == "channel.M") {
      long m;
      if (!parse_long(value, m))
        bad(key, "not an integer");
      else
        c.cells = static_cast<int>(m);
    } else if (key == "prior.kind") {
      c.prior.kind = value;
    } else if (key == "prior.levels") {
      if (!parse_double_list(value, c.prior.levels)) bad(key, "not a number list");
    } else if (key == "prior.weights") {
      if (!parse_double_list(value, c.prior.weights))
        bad(key, "not a number list");
    } else if (key == "prior.level0") {
      if (!parse_double(value, c.prior.level0)) bad(key, "not a number");
    } else if (key == "prior.level1") {
      if (!parse_double(value, c.prior.level1)) bad(key, "not a number");
    } else if (key == "prior.rate01") {
      if (!parse_double(value, c.prior.rate01)) bad(key, "not a number");
    } else if (key == "prior.rate10") {
      if (!parse_double(value, c.prior.rate10)) bad(key, "not a number");
    } else if (key.rfind("prior.member.", 0) == 0) {
      // prior.member.<i>.values / prior.member.<i>.weight
      const std::string rest = key.substr(13);
      const std::size_t dot = rest.find('.');
      long index;
      if (dot == std::string::npos || !parse_long(rest.substr(0, dot), index) ||
          index < 0) {
        bad(key, "expected prior.member.<index>.values|weight");
        continue;
      }
      const std::string field = rest.substr(dot + 1);
      const std::size_t need = static_cast<std::size_t>(index) + 1;
      if (c.prior.member_values.size() < need) {
        c.prior.member_values.resize(need);
        c.prior.member_weights.resize(need, -1.0);
      }
      if (field == "values") {
        if (!parse_double_list(value, c.prior.member_values[index]))
          bad(key, "not a number list");
      } else if (field == "weight") {
        if (!parse_double(value, c.prior.member_weights[index]))
          bad(key, "not a number");
      } else {
        bad(key, "expected prior.member.<index>.values|weight");
      }
    } else if (key == "phi.mask") {
      if (!parse_mask(value, c.phi.mask))
        bad(key, "expected a string of 0/1 characters");
      else
        c.phi.present = true;
    } else if (key == "phi.runs") {
      if (!parse_runs(value, c.phi.mask))
        bad(key, "expected value:count pairs, e.g. 1:16,0:16");
      else
        c.phi.present = true;
    } else if (key == "observation.jumps") {
      if (!parse_double_list(value, c.observation.jumps))
        bad(key, "not a number list");
      else
        c.observation.jumps_present = true;
    } else if (key == "observation.gaussian") {
      if (!parse_double_list(value, c.observation.gaussian))
        bad(key, "not a number list");
      else
        c.observation.gaussian_present = true;
    } else if (key == "mc.n_outer") {
      if (!parse_long(value, c.mc.n_outer)) bad(key, "not an integer");
    } else if (key == "mc.n_prior") {
      if (!parse_long(value, c.mc.n_prior)) bad(key, "not an integer");
    } else if (key == "mc.seed") {
      if (!parse_u64(value, c.mc.seed))
        bad(key, "not an unsigned 64-bit integer");
      else
        c.mc.seed_present = true;
    } else if (key == "derivative.param") {
      c.deriv.param = value;
    } else if (key == "derivative.h") {
      if (!parse_double(value, c.deriv.h)) bad(key, "not a number");
    } else if (key == "output.dir") {
      c.output_dir = value;
    } else {
      c.parse_errors.push_back(key + ": unknown key");
    }
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::vector<std::string> validate(const ExperimentConfig& c) {
  std::vector<std::string> d = c.parse_errors;
  auto err = [&](const std::string& m) { d.push_back(m); };

  const std::set<std::string> scenarios(std::begin(kScenarios),
                                        std::end(kScenarios));
  const bool known_scenario = scenarios.count(c.scenario) != 0;
  if (c.scenario.empty())
    err("scenario: required");
  else if (!known_scenario)
    err("scenario: unknown value '" + c.scenario + "'");

  if (!(c.lambda > 0.0)) err("channel.lambda: must be positive");
  if (!(c.alpha > 0.0)) err("channel.alpha: must be positive");
  if (!(c.horizon > 0.0)) err("channel.T: must be positive");
  if (c.cells < 1) err("channel.M: must be a positive integer");

  // Prior.
  if (c.prior.kind == "levels") {
    if (c.prior.levels.empty()) err("prior.levels: required for kind=levels");
    if (c.prior.weights.size() != c.prior.levels.size())
      err("prior.weights: must have one weight per level");
    for (double x : c.prior.levels)
      if (!(x >= 0.0)) {
        err("prior.levels: levels must be >= 0");
        break;
      }
    double total = 0.0;
    bool nonneg = true;
    for (double w : c.prior.weights) {
      if (!(w >= 0.0)) nonneg = false;
      total += w;
    }
    if (!nonneg)
      err("prior.weights: weights must be >= 0");
    else if (!c.prior.weights.empty() && std::fabs(total - 1.0) > 1e-9)
      err("prior.weights: must sum to 1 within 1e-9");
  } else if (c.prior.kind == "markov") {
    if (!(c.prior.level0 >= 0.0)) err("prior.level0: must be >= 0");
    if (!(c.prior.level1 >= 0.0)) err("prior.level1: must be >= 0");
    if (!(c.prior.rate01 >= 0.0)) err("prior.rate01: must be >= 0");
    if (!(c.prior.rate10 >= 0.0)) err("prior.rate10: must be >= 0");
    if (!(c.prior.rate01 + c.prior.rate10 > 0.0))
      err("prior.rate01: switching rates must not both be zero");
    if (c.mc.n_prior < 1)
      err("mc.n_prior: must be >= 1 for prior.kind=markov");
  } else if (c.prior.kind == "paths") {
    if (c.prior.member_values.empty())
      err("prior.member.0.values: at least one member required for kind=paths");
    for (std::size_t i = 0; i < c.prior.member_values.size(); ++i) {
      const std::string base = "prior.member." + std::to_string(i);
      if (c.prior.member_values[i].empty())
        err(base + ".values: required");
      else if (static_cast<int>(c.prior.member_values[i].size()) != c.cells)
        err(base + ".values: must list one value per cell (channel.M)");
      for (double v : c.prior.member_values[i])
        if (!(v >= 0.0)) {
          err(base + ".values: values must be >= 0");
          break;
        }
      if (i < c.prior.member_weights.size() && !(c.prior.member_weights[i] > 0.0))
        err(base + ".weight: required and must be positive");
    }
  } else {
    err("prior.kind: must be levels, markov or paths");
  }

  // Scenario-specific requirements.
  const bool mixture = c.scenario == "mixture-estimate" ||
                       c.scenario == "mixture-derivative";
  const bool needs_n_outer =
      c.scenario == "mi" || c.scenario == "debruijn" ||
      c.scenario == "mi-derivative" || c.scenario == "mixture-derivative" ||
      c.scenario == "operator-checks";
  if (known_scenario) {
    if (!c.mc.seed_present) err("mc.seed: required");
    if (needs_n_outer && c.mc.n_outer < 2) err("mc.n_outer: must be >= 2");
    if (mixture) {
      if (!c.phi.present)
        err("phi.mask: required for mixture scenarios (or phi.runs)");
      else if (static_cast<int>(c.phi.mask.size()) != c.cells)
        err("phi.mask: must cover exactly channel.M cells");
    } else if (c.phi.present) {
      err("phi.mask: only used by mixture scenarios");
    }
    if (c.observation.jumps_present &&
        !(c.scenario == "path-estimate" || c.scenario == "mixture-estimate"))
      err("observation.jumps: only used by path-estimate/mixture-estimate");
    if (c.observation.gaussian_present && c.scenario != "mixture-estimate")
      err("observation.gaussian: only used by mixture-estimate");
  }

  if (c.observation.jumps_present) {
    for (double z : c.observation.jumps)
      if (!(z >= 0.0) || !(z <= c.horizon)) {
        err("observation.jumps: times must lie in [0, channel.T]");
        break;
      }
  }
  if (c.scenario == "mixture-estimate" && c.phi.present &&
      static_cast<int>(c.phi.mask.size()) == c.cells) {
    if (c.observation.jumps_present != c.observation.gaussian_present) {
      err("observation.gaussian: explicit mixture observations need both "
          "observation.jumps and observation.gaussian");
    } else if (c.observation.jumps_present) {
      long diffusion_cells = 0;
      for (auto m : c.phi.mask)
        if (m == 0) ++diffusion_cells;
      if (static_cast<long>(c.observation.gaussian.size()) != diffusion_cells)
        err("observation.gaussian: one increment per diffusion cell required");
      const double dt = c.horizon / c.cells;
      for (double z : c.observation.jumps) {
        int cell = static_cast<int>(z / dt);
        if (cell >= c.cells) cell = c.cells - 1;
        if (cell >= 0 && cell < static_cast<int>(c.phi.mask.size()) &&
            c.phi.mask[cell] == 0) {
          err("observation.jumps: jump at " + std::to_string(z) +
              " lies in a diffusion (phi=0) cell");
          break;
        }
      }
    }
  }

  if (!(c.deriv.param == "alpha" || c.deriv.param == "lambda" ||
        c.deriv.param == "both"))
    err("derivative.param: must be alpha, lambda or both");
  if (c.deriv.h < 0.0) err("derivative.h: must be positive when given");
  if (c.deriv.h > 0.0) {
    if (c.deriv.param != "alpha" && c.deriv.h >= c.lambda)
      err("derivative.h: must be smaller than channel.lambda");
    if (c.deriv.param != "lambda" && c.deriv.h >= c.alpha)
      err("derivative.h: must be smaller than channel.alpha");
  }

  if (c.output_dir.empty()) err("output.dir: must not be empty");
  return d;
}

}  // namespace poischan::cli
