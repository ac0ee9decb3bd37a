#include "cylev/experiment.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <stdexcept>

#include "cylev/io.hpp"
#include "cylev/radonify.hpp"

namespace cylev {

namespace {

namespace fs = std::filesystem;

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
  return (fs::path(cfg.output_dir) / name).string();
}

TimeGrid<double> base_grid(const ExperimentConfig& cfg) {
  return TimeGrid<double>::uniform(cfg.horizon, cfg.steps);
}

// Basis directions f_0, f_1 in G for the projection-based tests.
FiniteDimensionalProjection<double> default_projection(const ExperimentConfig& cfg) {
  std::vector<CoordinateVector<double>> dirs;
  const Index dim = cfg.op.dim_codomain();
  for (Index j = 0; j < std::min<Index>(2, dim); ++j) {
    dirs.push_back(CoordinateVector<double>::basis(dim, j, Space::G));
  }
  return FiniteDimensionalProjection<double>::from_vectors(dirs);
}

PathEnsemble<double> ensemble_for(const ExperimentConfig& cfg, std::uint64_t sub_seed) {
  return radonified_ensemble(cfg.model, base_grid(cfg), cfg.coordinates, cfg.op,
                             cfg.truncation_n, cfg.replications, sub_seed);
}

void write_summary(const ExperimentConfig& cfg, const std::vector<TestReport>& reports) {
  io::write_text_file(out_path(cfg, "reports.jsonl"), io::reports_to_jsonl(reports, cfg.config_hash));
  io::write_text_file(out_path(cfg, "summary.csv"), io::reports_to_csv(reports));
}

bool all_passed(const std::vector<TestReport>& reports) {
  for (const auto& r : reports) {
    if (!r.passed) return false;
  }
  return true;
}

}  // namespace

std::vector<TestReport> verify_suite(const ExperimentConfig& cfg) {
  const auto grid = base_grid(cfg);
  const auto proj = default_projection(cfg);
  const TestsConfig& tc = cfg.tests;
  const double horizon = cfg.horizon;

  std::vector<TestReport> reports;
  reports.push_back(zero_start_check<double>(ensemble_for(cfg, mix64(cfg.seed, 1))));
  reports.push_back(version_defect_check<double>(cfg.model, grid, cfg.coordinates, cfg.op,
                                                 cfg.truncation_n,
                                                 tc.version_check_replications,
                                                 mix64(cfg.seed, 2)));
  reports.push_back(test_stationary_increments<double>(
      ensemble_for(cfg, mix64(cfg.seed, 3)), tc.stationarity_s * horizon,
      tc.stationarity_t * horizon, tc.stationarity_dt * horizon, proj, tc.alpha));
  reports.push_back(test_independent_increments<double>(
      ensemble_for(cfg, mix64(cfg.seed, 4)),
      {{0.0, horizon / 2.0}, {horizon / 2.0, horizon}}, proj, tc.independence_u_grid,
      tc.cf_tol_mult));
  ContinuityOptions<double> copts;
  copts.dt_max = tc.continuity_dt_max * horizon;
  copts.levels = tc.continuity_levels;
  copts.floor = tc.continuity_floor;
  reports.push_back(test_stochastic_continuity<double>(ensemble_for(cfg, mix64(cfg.seed, 5)),
                                                       0.25 * horizon, tc.continuity_epsilons,
                                                       copts));
  return reports;
}

int run_simulate(const ExperimentConfig& cfg) {
  auto bundle = simulate_bundle(cfg.model, base_grid(cfg), cfg.coordinates, cfg.seed);
  io::write_text_file(out_path(cfg, "bundle.csv"), io::bundle_to_csv(bundle));
  io::write_text_file(out_path(cfg, "bundle_meta.json"),
                      io::bundle_sidecar(bundle).dump(2) + "\n");
  return 0;
}

int run_radonify(const ExperimentConfig& cfg) {
  auto bundle = simulate_bundle(cfg.model, base_grid(cfg), cfg.coordinates, cfg.seed);
  auto path = radonify_series(bundle, cfg.op, cfg.truncation_n);
  io::write_text_file(out_path(cfg, "vector_path.csv"), io::vector_path_to_csv(path));
  return 0;
}

int run_verify(const ExperimentConfig& cfg) {
  const auto reports = verify_suite(cfg);
  write_summary(cfg, reports);
  return all_passed(reports) ? 0 : 1;
}

int run_convergence(const ExperimentConfig& cfg) {
  if (cfg.probe_pairs.empty()) {
    throw std::invalid_argument("config: truncations.probe_pairs is required for convergence");
  }
  const auto grid = base_grid(cfg);
  const auto probes = cauchy_probe(cfg.model, grid, cfg.coordinates, cfg.op, cfg.probe_pairs,
                                   cfg.tests.probe_epsilons, cfg.replications,
                                   mix64(cfg.seed, 11));

  std::ostringstream jsonl;
  for (const auto& p : probes) {
    jsonl << io::probe_to_json(p, cfg.horizon, cfg.config_hash, cfg.seed).dump() << "\n";
  }
  io::write_text_file(out_path(cfg, "probes.jsonl"), jsonl.str());

  // contrast table: squared bare series norm against the radonified norm;
  // by Parseval, ||Y_n(T)||^2 = sum_{k<n} lambda_k^2 X_T(h_k)^2
  {
    const std::uint64_t sub_seed = mix64(cfg.seed, 12);
    const std::size_t n_count = cfg.tests.contrast_ns.size();
    std::vector<double> bare_sq(n_count, 0.0);
    std::vector<double> radon_sq(n_count, 0.0);
    for (std::int64_t r = 0; r < cfg.replications; ++r) {
      auto bundle = simulate_bundle(cfg.model, grid, cfg.coordinates, derived_seed(sub_seed, r));
      const Index last = bundle.grid().size() - 1;
      VectorX<double> coords =
          cfg.op.left().transpose() * bundle.paths().row(last).transpose();
      for (std::size_t i = 0; i < n_count; ++i) {
        const Index n = cfg.tests.contrast_ns[i];
        const double bare = bare_series_norm(bundle, n, cfg.horizon);
        bare_sq[i] += bare * bare;
        const Index rn = std::min<Index>(n, cfg.op.rank());
        radon_sq[i] += (cfg.op.singular_values().head(rn).array() * coords.head(rn).array())
                           .square()
                           .sum();
      }
    }
    std::ostringstream csv;
    csv << "n,mean_bare_norm_sq,mean_radonified_norm_sq\n";
    for (std::size_t i = 0; i < n_count; ++i) {
      csv << cfg.tests.contrast_ns[i] << "," << io::format_double(bare_sq[i] / cfg.replications)
          << "," << io::format_double(radon_sq[i] / cfg.replications) << "\n";
    }
    io::write_text_file(out_path(cfg, "contrast.csv"), csv.str());
  }

  // exit status: exceedance decreasing across pairs (within 2 MC standard
  // errors) for each epsilon, and the Chebyshev oracle respected in at
  // least 95% of configurations
  bool monotone = true;
  const double reps = static_cast<double>(cfg.replications);
  const std::size_t n_eps = cfg.tests.probe_epsilons.size();
  for (std::size_t e = 0; e < n_eps; ++e) {
    for (std::size_t p = 1; p < cfg.probe_pairs.size(); ++p) {
      const double prev = probes[(p - 1) * n_eps + e].empirical_prob;
      const double cur = probes[p * n_eps + e].empirical_prob;
      const double se = std::sqrt(
          std::max(prev * (1.0 - prev), cur * (1.0 - cur)) / reps);
      if (cur > prev + 2.0 * se + 1e-12) monotone = false;
    }
  }
  std::size_t oracle_ok = 0;
  for (const auto& p : probes) {
    const double bound = p.tail_sq * cfg.horizon / (p.epsilon * p.epsilon);
    if (p.empirical_prob <= bound) ++oracle_ok;
  }
  const bool oracle = oracle_ok * 20 >= probes.size() * 19;  // >= 95%
  return (monotone && oracle) ? 0 : 1;
}

int run_cf_check(const ExperimentConfig& cfg) {
  auto g = CoordinateVector<double>::basis(cfg.op.dim_codomain(), 0, Space::G);
  std::vector<TestReport> reports;
  reports.push_back(cf_match<double>(cfg.model, cfg.op, g, cfg.tests.cf_time, cfg.tests.cf_u_grid,
                                     cfg.replications, mix64(cfg.seed, 21), cfg.truncation_n,
                                     cfg.tests.cf_tol_mult));
  write_summary(cfg, reports);
  return all_passed(reports) ? 0 : 1;
}

int run_command(const ExperimentConfig& cfg, const std::string& command) {
  std::filesystem::create_directories(cfg.output_dir);

  int code = 0;
  if (command == "simulate") {
    code = run_simulate(cfg);
  } else if (command == "radonify") {
    code = run_radonify(cfg);
  } else if (command == "verify") {
    code = run_verify(cfg);
  } else if (command == "convergence") {
    code = run_convergence(cfg);
  } else if (command == "cf-check") {
    code = run_cf_check(cfg);
  } else {
    throw std::invalid_argument("unknown command: " + command);
  }

  nlohmann::json meta;
  meta["command"] = command;
  meta["config_hash"] = cfg.config_hash;
  meta["seed"] = cfg.seed;
  meta["exit_code"] = code;
  meta["unix_time"] = std::chrono::duration_cast<std::chrono::seconds>(
                          std::chrono::system_clock::now().time_since_epoch())
                          .count();
  io::write_text_file(out_path(cfg, "run_meta.json"), meta.dump(2) + "\n");
  return code;
}

}  // namespace cylev
