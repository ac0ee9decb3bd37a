#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cylev/cylindrical.hpp"
#include "cylev/hilbert.hpp"
#include "cylev/radonify.hpp"
#include "cylev/rng.hpp"

namespace cylev {

// Outcome of one statistical check. p-value tests pass when p >= threshold
// (the significance level); defect-style tests pass when the statistic is
// at most the threshold (a tolerance) and carry no p-value.
struct TestReport {
  std::string name;
  double statistic = 0.0;
  std::optional<double> p_value;
  double threshold = 0.0;
  bool passed = false;
  std::int64_t sample_size = 0;
  std::uint64_t seed = 0;
};

inline TestReport make_pvalue_report(std::string name, double statistic, double p_value,
                                     double alpha, std::int64_t sample_size, std::uint64_t seed) {
  TestReport r;
  r.name = std::move(name);
  r.statistic = statistic;
  r.p_value = p_value;
  r.threshold = alpha;
  r.passed = p_value >= alpha;
  r.sample_size = sample_size;
  r.seed = seed;
  return r;
}

inline TestReport make_defect_report(std::string name, double statistic, double tolerance,
                                     std::int64_t sample_size, std::uint64_t seed) {
  TestReport r;
  r.name = std::move(name);
  r.statistic = statistic;
  r.threshold = tolerance;
  r.passed = statistic <= tolerance;
  r.sample_size = sample_size;
  r.seed = seed;
  return r;
}

// Directions g_1..g_n spanning a finite-dimensional projection
// pi(y) = (<y, g_1>, ..., <y, g_n>).
template <typename Scalar>
class FiniteDimensionalProjection {
 public:
  explicit FiniteDimensionalProjection(MatrixX<Scalar> directions)
      : directions_(std::move(directions)) {
    if (directions_.cols() < 1 || directions_.rows() < 1) {
      throw std::invalid_argument("FiniteDimensionalProjection: needs at least one direction");
    }
    if (!all_finite(directions_)) {
      throw std::invalid_argument("FiniteDimensionalProjection: directions must be finite");
    }
  }

  static FiniteDimensionalProjection from_vectors(
      const std::vector<CoordinateVector<Scalar>>& dirs) {
    if (dirs.empty()) {
      throw std::invalid_argument("FiniteDimensionalProjection: needs at least one direction");
    }
    MatrixX<Scalar> m(dirs.front().size(), static_cast<Index>(dirs.size()));
    for (std::size_t j = 0; j < dirs.size(); ++j) {
      if (dirs[j].size() != m.rows()) {
        throw std::invalid_argument("FiniteDimensionalProjection: inconsistent direction lengths");
      }
      m.col(static_cast<Index>(j)) = dirs[j].coords();
    }
    return FiniteDimensionalProjection(std::move(m));
  }

  const MatrixX<Scalar>& directions() const noexcept { return directions_; }
  Index count() const noexcept { return directions_.cols(); }
  Index dim() const noexcept { return directions_.rows(); }

 private:
  MatrixX<Scalar> directions_;  // dim(G) x n
};

// Empirical characteristic function (1/R) sum_r exp(i u x_r).
template <typename Scalar>
std::complex<double> empirical_cf(std::span<const Scalar> samples, double u) {
  if (samples.empty()) {
    throw std::invalid_argument("empirical_cf: samples must be nonempty");
  }
  std::complex<double> acc(0.0, 0.0);
  for (const Scalar& x : samples) {
    acc += std::exp(std::complex<double>(0.0, u * static_cast<double>(x)));
  }
  return acc / static_cast<double>(samples.size());
}

// Survival function Q of the Kolmogorov distribution,
// Q(x) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 x^2).
inline double kolmogorov_q(double x) {
  if (x <= 0.2) return 1.0;  // Q(0.2) = 1 to well beyond double noise
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 128; ++j) {
    const double term = std::exp(-2.0 * j * j * x * x);
    sum += sign * term;
    if (term < 1e-14) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

// Two-sample Kolmogorov-Smirnov test. The p-value evaluates the asymptotic
// Kolmogorov distribution at the finite-size-corrected argument
// (sqrt(ne) + 0.12 + 0.11/sqrt(ne)) D with ne = na nb / (na + nb).
template <typename Scalar>
TestReport ks_two_sample(std::span<const Scalar> a, std::span<const Scalar> b, double alpha = 0.05,
                         std::string name = "ks_two_sample", std::uint64_t seed = 0) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("ks_two_sample: both samples must be nonempty");
  }
  std::vector<Scalar> sa(a.begin(), a.end());
  std::vector<Scalar> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());

  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < sa.size() && j < sb.size()) {
    const Scalar v = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == v) ++i;
    while (j < sb.size() && sb[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }

  const double ne = na * nb / (na + nb);
  const double arg = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  const double p = kolmogorov_q(arg);
  return make_pvalue_report(std::move(name), d, p, alpha,
                            static_cast<std::int64_t>(sa.size() + sb.size()), seed);
}

namespace detail {

// <Y_{t1} - Y_{t0}, g_j> for all directions of a projection.
template <typename Scalar>
VectorX<Scalar> projected_increment(const VectorPath<Scalar>& path,
                                    const FiniteDimensionalProjection<Scalar>& proj, Scalar t0,
                                    Scalar t1) {
  const Index i0 = path.grid().index_of(t0);
  const Index i1 = path.grid().index_of(t1);
  VectorX<Scalar> diff = (path.values().row(i1) - path.values().row(i0)).transpose();
  return proj.directions().transpose() * diff;
}

}  // namespace detail

// Increment distribution over [s, s+dt] versus [t, t+dt], KS-compared per
// direction and Bonferroni-combined across directions.
template <typename Scalar>
TestReport test_stationary_increments(const PathEnsemble<Scalar>& paths, Scalar s, Scalar t,
                                      Scalar dt, const FiniteDimensionalProjection<Scalar>& proj,
                                      double alpha = 0.05,
                                      std::string name = "stationary_increments") {
  if (paths.replications < 100) {
    throw std::invalid_argument("test_stationary_increments: needs at least 100 replications");
  }
  if (s < Scalar(0) || t < Scalar(0) || dt < Scalar(0)) {
    throw std::invalid_argument("test_stationary_increments: times must be nonnegative");
  }

  const Index n_dir = proj.count();
  const std::int64_t reps = paths.replications;
  MatrixX<Scalar> first(reps, n_dir);
  MatrixX<Scalar> second(reps, n_dir);
  for (std::int64_t r = 0; r < reps; ++r) {
    const VectorPath<Scalar> path = paths.generate(r);
    if (s + dt > path.grid().horizon() || t + dt > path.grid().horizon()) {
      std::ostringstream msg;
      msg << "test_stationary_increments: interval end exceeds horizon " << path.grid().horizon();
      throw std::invalid_argument(msg.str());
    }
    first.row(r) = detail::projected_increment(path, proj, s, s + dt).transpose();
    second.row(r) = detail::projected_increment(path, proj, t, t + dt).transpose();
  }

  double max_stat = 0.0;
  double min_p = 1.0;
  for (Index d = 0; d < n_dir; ++d) {
    std::vector<Scalar> a(first.col(d).data(), first.col(d).data() + reps);
    std::vector<Scalar> b(second.col(d).data(), second.col(d).data() + reps);
    TestReport ks = ks_two_sample<Scalar>(a, b, alpha);
    max_stat = std::max(max_stat, ks.statistic);
    min_p = std::min(min_p, *ks.p_value);
  }
  const double bonferroni_p = std::min(1.0, static_cast<double>(n_dir) * min_p);
  return make_pvalue_report(std::move(name), max_stat, bonferroni_p, alpha, reps, paths.seed);
}

// Max over the frequency grid of |cf_joint(u,v) - cf_A(u) cf_B(v)| for two
// scalar samples; the cylinder-set surrogate for independence.
template <typename Scalar>
double cf_factorization_gap(std::span<const Scalar> a, std::span<const Scalar> b,
                            const std::vector<double>& u_grid) {
  if (a.size() != b.size() || a.empty()) {
    throw std::invalid_argument("cf_factorization_gap: samples must be nonempty and paired");
  }
  if (u_grid.empty()) {
    throw std::invalid_argument("cf_factorization_gap: frequency grid must be nonempty");
  }
  const std::size_t reps = a.size();
  const std::size_t nu = u_grid.size();

  // phase factors e^{iu a_r}, e^{iv b_r} per frequency
  std::vector<std::vector<std::complex<double>>> ea(nu), eb(nu);
  for (std::size_t k = 0; k < nu; ++k) {
    ea[k].resize(reps);
    eb[k].resize(reps);
    for (std::size_t r = 0; r < reps; ++r) {
      ea[k][r] = std::exp(std::complex<double>(0.0, u_grid[k] * static_cast<double>(a[r])));
      eb[k][r] = std::exp(std::complex<double>(0.0, u_grid[k] * static_cast<double>(b[r])));
    }
  }

  std::vector<std::complex<double>> cf_a(nu), cf_b(nu);
  for (std::size_t k = 0; k < nu; ++k) {
    std::complex<double> sa(0.0, 0.0), sb(0.0, 0.0);
    for (std::size_t r = 0; r < reps; ++r) {
      sa += ea[k][r];
      sb += eb[k][r];
    }
    cf_a[k] = sa / static_cast<double>(reps);
    cf_b[k] = sb / static_cast<double>(reps);
  }

  double gap = 0.0;
  for (std::size_t ku = 0; ku < nu; ++ku) {
    for (std::size_t kv = 0; kv < nu; ++kv) {
      std::complex<double> joint(0.0, 0.0);
      for (std::size_t r = 0; r < reps; ++r) {
        joint += ea[ku][r] * eb[kv][r];
      }
      joint /= static_cast<double>(reps);
      gap = std::max(gap, std::abs(joint - cf_a[ku] * cf_b[kv]));
    }
  }
  return gap;
}

// Factorization of the empirical cf of projected increments over disjoint
// intervals; the statistic must stay below tol_mult / sqrt(R).
template <typename Scalar>
TestReport test_independent_increments(const PathEnsemble<Scalar>& paths,
                                       const std::vector<std::pair<Scalar, Scalar>>& intervals,
                                       const FiniteDimensionalProjection<Scalar>& proj,
                                       const std::vector<double>& u_grid, double tol_mult = 4.0,
                                       std::string name = "independent_increments") {
  if (intervals.size() < 2) {
    throw std::invalid_argument("test_independent_increments: needs at least two intervals");
  }
  for (const auto& [lo, hi] : intervals) {
    if (!(lo < hi)) {
      throw std::invalid_argument("test_independent_increments: intervals must have positive length");
    }
  }
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    for (std::size_t j = i + 1; j < intervals.size(); ++j) {
      const Scalar lo = std::max(intervals[i].first, intervals[j].first);
      const Scalar hi = std::min(intervals[i].second, intervals[j].second);
      if (lo < hi) {
        throw std::invalid_argument("test_independent_increments: intervals overlap");
      }
    }
  }

  const std::int64_t reps = paths.replications;
  const Index n_dir = proj.count();
  const std::size_t n_int = intervals.size();

  // samples[i] is reps x n_dir
  std::vector<MatrixX<Scalar>> samples(n_int, MatrixX<Scalar>(reps, n_dir));
  for (std::int64_t r = 0; r < reps; ++r) {
    const VectorPath<Scalar> path = paths.generate(r);
    for (std::size_t i = 0; i < n_int; ++i) {
      samples[i].row(r) =
          detail::projected_increment(path, proj, intervals[i].first, intervals[i].second)
              .transpose();
    }
  }

  // standardize marginals so the fixed frequency grid probes informative scales
  for (auto& m : samples) {
    for (Index d = 0; d < n_dir; ++d) {
      const Scalar mean = m.col(d).mean();
      const Scalar sd = std::sqrt((m.col(d).array() - mean).square().sum() /
                                  static_cast<Scalar>(std::max<std::int64_t>(reps - 1, 1)));
      if (sd > Scalar(0)) m.col(d) = (m.col(d).array() - mean) / sd;
    }
  }

  double stat = 0.0;
  for (std::size_t i = 0; i < n_int; ++i) {
    for (std::size_t j = i + 1; j < n_int; ++j) {
      for (Index da = 0; da < n_dir; ++da) {
        for (Index db = 0; db < n_dir; ++db) {
          std::vector<Scalar> a(samples[i].col(da).data(), samples[i].col(da).data() + reps);
          std::vector<Scalar> b(samples[j].col(db).data(), samples[j].col(db).data() + reps);
          stat = std::max(stat, cf_factorization_gap<Scalar>(a, b, u_grid));
        }
      }
    }
  }
  const double tol = tol_mult / std::sqrt(static_cast<double>(reps));
  return make_defect_report(std::move(name), stat, tol, reps, paths.seed);
}

// Exceedance probabilities P(||Y_{s+dt} - Y_s|| > eps) on an explicit dt
// ladder; one row per epsilon.
template <typename Scalar>
struct ContinuityTable {
  std::vector<Scalar> dts;
  std::vector<Scalar> epsilons;
  MatrixX<Scalar> probs;  // epsilons x dts
  std::int64_t replications = 0;
};

template <typename Scalar>
std::vector<Scalar> dyadic_ladder(Scalar dt_max, int levels) {
  if (!(dt_max > Scalar(0)) || levels < 1) {
    throw std::invalid_argument("dyadic_ladder: dt_max must be positive and levels >= 1");
  }
  std::vector<Scalar> dts(static_cast<std::size_t>(levels));
  Scalar dt = dt_max;
  for (int j = 0; j < levels; ++j) {
    dts[static_cast<std::size_t>(j)] = dt;
    dt /= Scalar(2);
  }
  return dts;
}

template <typename Scalar>
ContinuityTable<Scalar> continuity_ladder(const PathEnsemble<Scalar>& paths, Scalar s,
                                          const std::vector<Scalar>& epsilons,
                                          const std::vector<Scalar>& dts) {
  if (epsilons.empty() || dts.empty()) {
    throw std::invalid_argument("continuity_ladder: epsilons and dts must be nonempty");
  }
  {
    // fail fast with guidance when the ladder leaves the grid
    const VectorPath<Scalar> probe = paths.generate(0);
    for (Scalar dt : dts) {
      if (!probe.grid().contains(s) || !probe.grid().contains(s + dt)) {
        std::ostringstream msg;
        msg << "continuity_ladder: time " << (s + dt)
            << " is not resolved by the grid; refine the grid or shorten the ladder";
        throw std::invalid_argument(msg.str());
      }
    }
  }

  ContinuityTable<Scalar> table;
  table.dts = dts;
  table.epsilons = epsilons;
  table.replications = paths.replications;
  table.probs = MatrixX<Scalar>::Zero(static_cast<Index>(epsilons.size()),
                                      static_cast<Index>(dts.size()));
  for (std::int64_t r = 0; r < paths.replications; ++r) {
    const VectorPath<Scalar> path = paths.generate(r);
    const Index i0 = path.grid().index_of(s);
    for (std::size_t j = 0; j < dts.size(); ++j) {
      const Index i1 = path.grid().index_of(s + dts[j]);
      const Scalar gap = (path.values().row(i1) - path.values().row(i0)).norm();
      for (std::size_t e = 0; e < epsilons.size(); ++e) {
        if (gap > epsilons[e]) table.probs(static_cast<Index>(e), static_cast<Index>(j)) += 1;
      }
    }
  }
  table.probs /= static_cast<Scalar>(paths.replications);
  return table;
}

template <typename Scalar>
struct ContinuityOptions {
  Scalar dt_max = Scalar(0.25);
  int levels = 5;
  double floor = 0.05;  // required bound on p at the smallest dt
};

// Pass rule: for every epsilon, p(dt) is non-increasing as dt shrinks
// (within 2 Monte Carlo standard errors) and p at the smallest dt is below
// the configured floor.
template <typename Scalar>
TestReport test_stochastic_continuity(const PathEnsemble<Scalar>& paths, Scalar s,
                                      const std::vector<Scalar>& epsilons,
                                      const ContinuityOptions<Scalar>& opts,
                                      std::string name = "stochastic_continuity") {
  const auto dts = dyadic_ladder(opts.dt_max, opts.levels);
  const auto table = continuity_ladder(paths, s, epsilons, dts);
  const double reps = static_cast<double>(table.replications);

  bool ok = true;
  double smallest_dt_p = 0.0;
  for (Index e = 0; e < table.probs.rows(); ++e) {
    for (Index j = 1; j < table.probs.cols(); ++j) {
      const double prev = static_cast<double>(table.probs(e, j - 1));
      const double cur = static_cast<double>(table.probs(e, j));
      const double se = std::sqrt(std::max(prev * (1.0 - prev), cur * (1.0 - cur)) / reps);
      if (cur > prev + 2.0 * se + 1e-12) ok = false;
    }
    smallest_dt_p = std::max(smallest_dt_p, static_cast<double>(table.probs(e, table.probs.cols() - 1)));
  }
  if (smallest_dt_p >= opts.floor) ok = false;

  TestReport r = make_defect_report(std::move(name), smallest_dt_p, opts.floor,
                                    table.replications, paths.seed);
  r.passed = ok;
  return r;
}

// Empirical cf of <Y_t, g> against the closed form pushed through the
// truncated adjoint. Distributions at a single time are exact on a
// two-point grid, so sampling never discretizes.
template <typename Scalar>
TestReport cf_match(const CoordinateLevyModel<Scalar>& model, const HilbertSchmidtOp<Scalar>& op,
                    const CoordinateVector<Scalar>& g, Scalar t,
                    const std::vector<double>& u_grid, std::int64_t replications,
                    std::uint64_t seed, Index truncation_n = -1, double tol_mult = 4.0,
                    std::string name = "cf_match") {
  if (model.kind() == LevyKind::CompoundPoisson && !model.jump_law().has_closed_form_cf()) {
    throw std::invalid_argument(
        "cf_match: jump law has no closed-form cf; use the two-sample tests instead");
  }
  if (replications < 1) {
    throw std::invalid_argument("cf_match: replications must be >= 1");
  }
  if (!(t > Scalar(0))) {
    throw std::invalid_argument("cf_match: time must be positive");
  }
  const Index n = truncation_n < 0 ? op.rank() : truncation_n;

  const auto grid = TimeGrid<Scalar>::uniform(t, 1);
  std::vector<Scalar> samples(static_cast<std::size_t>(replications));
  for (std::int64_t r = 0; r < replications; ++r) {
    auto bundle = simulate_bundle(model, grid, op.dim_domain(), derived_seed(seed, r));
    auto path = radonify_series(bundle, op, n);
    samples[static_cast<std::size_t>(r)] =
        path.values().row(path.grid().size() - 1).dot(g.coords().transpose());
  }

  const CoordinateVector<Scalar> pushed = adjoint_apply_truncated(op, g, n);
  double gap = 0.0;
  for (double u : u_grid) {
    const std::complex<double> target = closed_form_cf(model, pushed, t, u);
    const std::complex<double> hat = empirical_cf<Scalar>(samples, u);
    gap = std::max(gap, std::abs(hat - target));
  }
  const double tol = tol_mult / std::sqrt(static_cast<double>(replications));
  return make_defect_report(std::move(name), gap, tol, replications, seed);
}

// Fraction of replications whose path does not start at the zero vector;
// must be exactly zero.
template <typename Scalar>
TestReport zero_start_check(const PathEnsemble<Scalar>& paths, std::string name = "zero_start") {
  std::int64_t bad = 0;
  for (std::int64_t r = 0; r < paths.replications; ++r) {
    if (paths.generate(r).values().row(0).norm() > Scalar(0)) ++bad;
  }
  const double fraction = static_cast<double>(bad) / static_cast<double>(paths.replications);
  return make_defect_report(std::move(name), fraction, 0.0, paths.replications, paths.seed);
}

// Max version defect over replications with a fresh random direction each.
template <typename Scalar>
TestReport version_defect_check(const CoordinateLevyModel<Scalar>& model,
                                const TimeGrid<Scalar>& grid, Index coordinates,
                                const HilbertSchmidtOp<Scalar>& op, Index truncation_n,
                                std::int64_t replications, std::uint64_t seed,
                                double tolerance = 1e-10,
                                std::string name = "version_identity") {
  double worst = 0.0;
  for (std::int64_t r = 0; r < replications; ++r) {
    auto bundle = simulate_bundle(model, grid, coordinates, derived_seed(seed, r));
    auto path = radonify_series(bundle, op, truncation_n);
    CounterEngine rng(derived_seed(seed, r), StreamPurpose::Direction, 0);
    VectorX<Scalar> g(op.dim_codomain());
    for (Index i = 0; i < g.size(); ++i) g[i] = static_cast<Scalar>(rng.normal());
    worst = std::max(worst, static_cast<double>(version_defect(
                                path, bundle, op, CoordinateVector<Scalar>(g, Space::G))));
  }
  return make_defect_report(std::move(name), worst, tolerance, replications, seed);
}

}  // namespace cylev
