#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cylev/cylindrical.hpp"
#include "cylev/hilbert.hpp"
#include "cylev/io.hpp"
#include "json.hpp"

namespace cylev {

using nlohmann::json;

// Knobs of the verification suites; every threshold has a default so small
// configs stay small.
struct TestsConfig {
  double alpha = 0.01;            // KS significance level
  double cf_tol_mult = 4.0;       // tolerance multiple of R^{-1/2}
  double stationarity_s = 0.125;  // window starts, as fractions of T
  double stationarity_t = 0.625;
  double stationarity_dt = 0.25;  // window length, as a fraction of T
  std::vector<double> independence_u_grid{0.5, 1.0, 2.0};
  std::vector<double> cf_u_grid{-4.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 4.0};
  double cf_time = 1.0;
  std::vector<double> continuity_epsilons{0.5, 1.0};
  double continuity_dt_max = 0.25;  // fraction of T
  int continuity_levels = 5;
  double continuity_floor = 0.05;
  std::vector<double> probe_epsilons{0.25, 0.5, 1.0};
  std::int64_t version_check_replications = 50;
  std::vector<Index> contrast_ns;  // defaults to {K/4, K/2, K}
};

struct ExperimentConfig {
  CoordinateLevyModel<double> model = CoordinateLevyModel<double>::wiener();
  HilbertSchmidtOp<double> op =
      HilbertSchmidtOp<double>::diagonal(VectorX<double>::Ones(1), 1, 1);
  double horizon = 1.0;
  Index steps = 256;
  Index coordinates = 64;     // K, the bundle truncation
  Index truncation_n = 12;    // series truncation
  std::vector<std::pair<Index, Index>> probe_pairs;
  std::int64_t replications = 2000;
  std::uint64_t seed = 1;
  TestsConfig tests;
  std::string output_dir = "out";
  std::string config_hash;  // hex digest of the canonical config document
};

namespace detail {

[[noreturn]] inline void config_error(const std::string& field, const std::string& why) {
  throw std::invalid_argument("config: " + field + " " + why);
}

template <typename T>
T get_field(const json& j, const std::string& field, const T& fallback) {
  if (!j.contains(field)) return fallback;
  try {
    return j.at(field).get<T>();
  } catch (const json::exception&) {
    config_error(field, "has the wrong type");
  }
}

template <typename T>
T require_field(const json& j, const std::string& field) {
  if (!j.contains(field)) config_error(field, "is required");
  try {
    return j.at(field).get<T>();
  } catch (const json::exception&) {
    config_error(field, "has the wrong type");
  }
}

inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline CoordinateLevyModel<double> parse_model(const json& j) {
  const auto kind = require_field<std::string>(j, "kind");
  if (kind == "wiener") {
    return CoordinateLevyModel<double>::wiener();
  }
  if (kind == "compound_poisson") {
    const double intensity = require_field<double>(j, "intensity");
    const auto law_name = get_field<std::string>(j, "jump_law", "standard_normal");
    JumpLaw law;
    if (law_name == "standard_normal") {
      law = JumpLaw::standard_normal();
    } else if (law_name == "rademacher") {
      law = JumpLaw::rademacher();
    } else if (law_name == "uniform_symmetric") {
      law = JumpLaw::uniform_symmetric();
    } else {
      config_error("model.jump_law", "must be one of standard_normal, rademacher, uniform_symmetric");
    }
    if (!(intensity > 0)) config_error("model.intensity", "must be positive");
    return CoordinateLevyModel<double>::compound_poisson(intensity, law);
  }
  if (kind == "stable") {
    const double alpha = require_field<double>(j, "alpha");
    if (!(alpha > 0.0 && alpha < 2.0)) config_error("model.alpha", "must lie in (0, 2)");
    return CoordinateLevyModel<double>::stable(alpha);
  }
  config_error("model.kind", "must be one of wiener, compound_poisson, stable");
}

// Inline singular triples (diagonal when left/right are omitted) or a file
// reference. Dimensions default to the bundle truncation K.
inline HilbertSchmidtOp<double> parse_operator(const json& j, Index coordinates,
                                               const std::filesystem::path& base_dir) {
  if (j.contains("file")) {
    const auto rel = j.at("file").get<std::string>();
    const auto path = (base_dir / rel).string();
    try {
      return io::load_hs(path);
    } catch (const json::exception& e) {
      config_error("operator.file", "does not parse: " + std::string(e.what()));
    } catch (const std::runtime_error& e) {
      config_error("operator.file", e.what());
    }
  }
  const auto lambda_vals = require_field<std::vector<double>>(j, "lambda");
  if (lambda_vals.empty()) config_error("operator.lambda", "must be nonempty");
  VectorX<double> lambda(static_cast<Index>(lambda_vals.size()));
  for (Index k = 0; k < lambda.size(); ++k) lambda[k] = lambda_vals[static_cast<std::size_t>(k)];

  if (j.contains("left") != j.contains("right")) {
    config_error("operator", "left and right must be given together");
  }
  if (j.contains("left")) {
    json full = j;
    full["K_H"] = get_field<Index>(j, "K_H", coordinates);
    full["K_G"] = get_field<Index>(j, "K_G", coordinates);
    try {
      return io::hs_from_json(full);
    } catch (const std::invalid_argument& e) {
      config_error("operator", e.what());
    }
  }
  const Index dim_h = get_field<Index>(j, "K_H", coordinates);
  const Index dim_g = get_field<Index>(j, "K_G", coordinates);
  if (lambda.size() > dim_h || lambda.size() > dim_g) {
    config_error("operator.lambda", "has more entries than K_H/K_G allow");
  }
  return HilbertSchmidtOp<double>::diagonal(std::move(lambda), dim_h, dim_g);
}

}  // namespace detail

inline ExperimentConfig parse_config(const json& j, const std::filesystem::path& base_dir) {
  using detail::config_error;
  using detail::get_field;
  using detail::require_field;

  ExperimentConfig cfg;
  cfg.config_hash = detail::hex64(detail::fnv1a(j.dump()));

  if (!j.contains("model")) config_error("model", "is required");
  cfg.model = detail::parse_model(j.at("model"));

  if (!j.contains("grid")) config_error("grid", "is required");
  cfg.horizon = require_field<double>(j.at("grid"), "T");
  cfg.steps = require_field<Index>(j.at("grid"), "steps");
  if (!(cfg.horizon > 0)) config_error("grid.T", "must be positive");
  if (cfg.steps < 1) config_error("grid.steps", "must be >= 1");

  const json trunc = j.contains("truncations") ? j.at("truncations") : json::object();
  cfg.coordinates = get_field<Index>(trunc, "K", 64);
  if (cfg.coordinates < 1) config_error("truncations.K", "must be >= 1");

  if (!j.contains("operator")) config_error("operator", "is required");
  cfg.op = detail::parse_operator(j.at("operator"), cfg.coordinates, base_dir);
  if (cfg.op.dim_domain() != cfg.coordinates) {
    config_error("operator", "H-side dimension must equal truncations.K");
  }

  cfg.truncation_n = get_field<Index>(trunc, "n", cfg.op.rank());
  if (cfg.truncation_n < 0 || cfg.truncation_n > cfg.op.rank()) {
    config_error("truncations.n", "must lie in [0, operator rank]");
  }
  if (trunc.contains("probe_pairs")) {
    for (const auto& pair : trunc.at("probe_pairs")) {
      if (!pair.is_array() || pair.size() != 2) {
        config_error("truncations.probe_pairs", "entries must be [m, n] pairs");
      }
      const Index m = pair[0].get<Index>();
      const Index n = pair[1].get<Index>();
      if (m < 0 || m > n || n > cfg.op.rank()) {
        config_error("truncations.probe_pairs",
                     "needs 0 <= m <= n <= operator rank for every pair");
      }
      cfg.probe_pairs.emplace_back(m, n);
    }
  }

  cfg.replications = get_field<std::int64_t>(j, "replications", 2000);
  if (cfg.replications < 1) config_error("replications", "must be >= 1");
  cfg.seed = get_field<std::uint64_t>(j, "seed", 1);
  cfg.output_dir = get_field<std::string>(j, "output_dir", "out");

  const json tests = j.contains("tests") ? j.at("tests") : json::object();
  TestsConfig& tc = cfg.tests;
  tc.alpha = get_field<double>(tests, "alpha", tc.alpha);
  if (!(tc.alpha > 0.0 && tc.alpha < 1.0)) config_error("tests.alpha", "must lie in (0, 1)");
  tc.cf_tol_mult = get_field<double>(tests, "cf_tol_mult", tc.cf_tol_mult);
  if (!(tc.cf_tol_mult > 0)) config_error("tests.cf_tol_mult", "must be positive");
  tc.stationarity_s = get_field<double>(tests, "stationarity_s", tc.stationarity_s);
  tc.stationarity_t = get_field<double>(tests, "stationarity_t", tc.stationarity_t);
  tc.stationarity_dt = get_field<double>(tests, "stationarity_dt", tc.stationarity_dt);
  for (double frac : {tc.stationarity_s, tc.stationarity_t, tc.stationarity_dt}) {
    if (!(frac >= 0.0 && frac <= 1.0)) {
      config_error("tests.stationarity_*", "window fractions must lie in [0, 1]");
    }
  }
  if (tc.stationarity_s + tc.stationarity_dt > 1.0 || tc.stationarity_t + tc.stationarity_dt > 1.0) {
    config_error("tests.stationarity_*", "windows must fit inside [0, T]");
  }
  tc.independence_u_grid =
      get_field<std::vector<double>>(tests, "independence_u_grid", tc.independence_u_grid);
  tc.cf_u_grid = get_field<std::vector<double>>(tests, "cf_u_grid", tc.cf_u_grid);
  tc.cf_time = get_field<double>(tests, "cf_time", tc.cf_time);
  if (!(tc.cf_time > 0)) config_error("tests.cf_time", "must be positive");
  tc.continuity_epsilons =
      get_field<std::vector<double>>(tests, "continuity_epsilons", tc.continuity_epsilons);
  tc.continuity_dt_max = get_field<double>(tests, "continuity_dt_max", tc.continuity_dt_max);
  tc.continuity_levels = get_field<int>(tests, "continuity_levels", tc.continuity_levels);
  tc.continuity_floor = get_field<double>(tests, "continuity_floor", tc.continuity_floor);
  if (tc.continuity_levels < 1) config_error("tests.continuity_levels", "must be >= 1");
  tc.probe_epsilons = get_field<std::vector<double>>(tests, "probe_epsilons", tc.probe_epsilons);
  tc.version_check_replications = get_field<std::int64_t>(tests, "version_check_replications",
                                                          tc.version_check_replications);
  if (tc.version_check_replications < 1) {
    config_error("tests.version_check_replications", "must be >= 1");
  }
  tc.contrast_ns = get_field<std::vector<Index>>(
      tests, "contrast_ns",
      {std::max<Index>(1, cfg.coordinates / 4), std::max<Index>(1, cfg.coordinates / 2),
       cfg.coordinates});
  for (Index n : tc.contrast_ns) {
    if (n < 1 || n > cfg.coordinates) {
      config_error("tests.contrast_ns", "entries must lie in [1, truncations.K]");
    }
  }
  return cfg;
}

inline ExperimentConfig load_config_file(const std::string& path) {
  json j;
  try {
    j = json::parse(io::read_text_file(path));
  } catch (const json::exception& e) {
    throw std::invalid_argument("config: " + path + " does not parse: " + e.what());
  }
  return parse_config(j, std::filesystem::path(path).parent_path());
}

}  // namespace cylev
