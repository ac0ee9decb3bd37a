#include <cmath>
#include <complex>
#include <vector>

#include "cylev/stats.hpp"
#include "doctest.h"

using cylev::CoordinateLevyModel;
using cylev::CoordinateVector;
using cylev::CounterEngine;
using cylev::FiniteDimensionalProjection;
using cylev::HilbertSchmidtOp;
using cylev::Index;
using cylev::MatrixX;
using cylev::PathEnsemble;
using cylev::Space;
using cylev::TestReport;
using cylev::TimeGrid;
using cylev::VectorPath;
using cylev::VectorX;

namespace {

std::vector<double> normal_sample(std::size_t n, std::uint64_t seed, double shift = 0.0) {
  CounterEngine rng(seed, cylev::StreamPurpose::Generic, 0);
  std::vector<double> xs(n);
  for (auto& x : xs) x = rng.normal() + shift;
  return xs;
}

PathEnsemble<double> wiener_ensemble(Index k, Index steps, Index rank, std::int64_t reps,
                                     std::uint64_t seed) {
  auto op = HilbertSchmidtOp<double>::diagonal(cylev::geometric_spectrum<double>(rank, 0.5), k, k);
  return cylev::radonified_ensemble(CoordinateLevyModel<double>::wiener(),
                                    TimeGrid<double>::uniform(1.0, steps), k, op, rank, reps, seed);
}

// Control fixture with deterministically time-scaled values; increments are
// no longer stationary.
PathEnsemble<double> time_scaled(PathEnsemble<double> base) {
  PathEnsemble<double> out = base;
  auto inner = base.generate;
  out.generate = [inner](std::int64_t r) {
    auto p = inner(r);
    MatrixX<double> v = p.values();
    for (Index i = 0; i < v.rows(); ++i) {
      v.row(i) *= (1.0 + p.grid()[i]);
    }
    return VectorPath<double>(p.grid(), std::move(v), p.truncation_n(), p.provenance());
  };
  return out;
}

FiniteDimensionalProjection<double> basis_projection(Index dim, std::initializer_list<Index> axes) {
  std::vector<CoordinateVector<double>> dirs;
  for (Index j : axes) dirs.push_back(CoordinateVector<double>::basis(dim, j, Space::G));
  return FiniteDimensionalProjection<double>::from_vectors(dirs);
}

}  // namespace

TEST_CASE("empirical cf basics") {
  std::vector<double> zeros(100, 0.0);
  for (double u : {0.0, 1.0, -3.4}) {
    CHECK(cylev::empirical_cf<double>(zeros, u) == std::complex<double>(1.0, 0.0));
  }
  auto xs = normal_sample(100, 1);
  CHECK(cylev::empirical_cf<double>(xs, 0.0) == std::complex<double>(1.0, 0.0));

  const std::vector<double> empty;
  CHECK_THROWS_AS(static_cast<void>(cylev::empirical_cf<double>(empty, 1.0)),
                  std::invalid_argument);
}

TEST_CASE("empirical cf of a large normal sample hits the Gaussian cf") {
  const std::size_t n = 100000;
  auto xs = normal_sample(n, 2);
  const auto hat = cylev::empirical_cf<double>(xs, 1.0);
  CHECK(std::abs(hat - std::complex<double>(std::exp(-0.5), 0.0)) <
        3.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(hat) <= 1.0);
}

TEST_CASE("kolmogorov survival function") {
  CHECK(cylev::kolmogorov_q(0.0) == 1.0);
  // one-term inversion: Q(sqrt(-ln(alpha/2)/2)) = alpha for small alpha
  CHECK(cylev::kolmogorov_q(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(cylev::kolmogorov_q(1.6276) == doctest::Approx(0.01).epsilon(1e-2));
  CHECK(cylev::kolmogorov_q(10.0) < 1e-12);
}

TEST_CASE("ks two-sample on identical samples") {
  auto xs = normal_sample(500, 3);
  auto rep = cylev::ks_two_sample<double>(xs, xs);
  CHECK(rep.statistic == 0.0);
  CHECK(*rep.p_value == 1.0);
  CHECK(rep.passed);
  CHECK(rep.sample_size == 1000);

  const std::vector<double> empty;
  CHECK_THROWS_AS(static_cast<void>(cylev::ks_two_sample<double>(xs, empty)),
                  std::invalid_argument);
}

TEST_CASE("ks null calibration over 200 fresh repetitions") {
  const double alpha = 0.05;
  int rejects = 0;
  const int runs = 200;
  for (int rep = 0; rep < runs; ++rep) {
    auto a = normal_sample(300, 1000 + 2 * rep);
    auto b = normal_sample(300, 1001 + 2 * rep);
    if (!cylev::ks_two_sample<double>(a, b, alpha).passed) ++rejects;
  }
  const double rate = static_cast<double>(rejects) / runs;
  const double sigma = std::sqrt(alpha * (1 - alpha) / runs);
  CHECK(std::abs(rate - alpha) < 3.0 * sigma);
}

TEST_CASE("ks power against a unit shift") {
  auto a = normal_sample(10000, 4);
  auto b = normal_sample(10000, 5, 1.0);
  auto rep = cylev::ks_two_sample<double>(a, b);
  CHECK(*rep.p_value < 1e-6);
  CHECK_FALSE(rep.passed);
}

TEST_CASE("stationary increments pass on the radonified Wiener null") {
  auto ens = wiener_ensemble(8, 64, 8, 400, 2024);
  auto proj = basis_projection(8, {0, 1});
  auto rep = cylev::test_stationary_increments<double>(ens, 0.125, 0.625, 0.25, proj, 0.01);
  CHECK(rep.passed);
  CHECK(rep.p_value.has_value());
  CHECK(rep.sample_size == 400);

  // s = t gives identical samples: statistic exactly 0
  auto same = cylev::test_stationary_increments<double>(ens, 0.25, 0.25, 0.25, proj, 0.01);
  CHECK(same.statistic == 0.0);
  CHECK(*same.p_value == 1.0);
}

TEST_CASE("stationary increments reject the time-scaled control") {
  auto ens = time_scaled(wiener_ensemble(8, 64, 8, 10000, 77));
  auto proj = basis_projection(8, {0});
  auto rep = cylev::test_stationary_increments<double>(ens, 0.0, 0.625, 0.25, proj, 0.01);
  CHECK_FALSE(rep.passed);
  CHECK(*rep.p_value < 1e-4);
}

TEST_CASE("stationary increments validates preconditions") {
  auto ens = wiener_ensemble(4, 16, 4, 120, 5);
  auto proj = basis_projection(4, {0});
  CHECK_THROWS_AS(static_cast<void>(cylev::test_stationary_increments<double>(
                      ens, 0.0, 0.5, 0.75, proj, 0.05)),
                  std::invalid_argument);
  auto tiny = wiener_ensemble(4, 16, 4, 50, 5);
  CHECK_THROWS_AS(static_cast<void>(cylev::test_stationary_increments<double>(
                      tiny, 0.0, 0.5, 0.25, proj, 0.05)),
                  std::invalid_argument);
}

TEST_CASE("cf factorization gap is exactly zero against a constant") {
  auto a = normal_sample(2000, 8);
  std::vector<double> zeros(2000, 0.0);
  CHECK(cylev::cf_factorization_gap<double>(a, zeros, {0.5, 1.0, 2.0}) < 1e-12);
}

TEST_CASE("cf factorization gap flags identical samples") {
  // for identical standard normal samples the gap at u = v = 1 approaches
  // |e^{-2} - e^{-1}| ~ 0.23, far above the 4/sqrt(R) tolerance
  auto a = normal_sample(2000, 9);
  const double gap = cylev::cf_factorization_gap<double>(a, a, {0.5, 1.0, 2.0});
  CHECK(gap > 2.0 * 4.0 / std::sqrt(2000.0));
  CHECK(gap > 0.2);
}

TEST_CASE("independent increments pass on the radonified Wiener null") {
  auto ens = wiener_ensemble(8, 32, 8, 10000, 31);
  auto proj = basis_projection(8, {0, 1});
  std::vector<std::pair<double, double>> intervals{{0.0, 0.5}, {0.5, 1.0}};
  auto rep = cylev::test_independent_increments<double>(ens, intervals, proj, {0.5, 1.0, 2.0});
  CHECK(rep.passed);
  CHECK_FALSE(rep.p_value.has_value());
  CHECK(rep.threshold == doctest::Approx(4.0 / std::sqrt(10000.0)));
}

TEST_CASE("independent increments validate interval geometry") {
  auto ens = wiener_ensemble(4, 16, 4, 200, 6);
  auto proj = basis_projection(4, {0});
  std::vector<std::pair<double, double>> overlapping{{0.0, 0.5}, {0.25, 0.75}};
  CHECK_THROWS_AS(static_cast<void>(cylev::test_independent_increments<double>(
                      ens, overlapping, proj, {1.0})),
                  std::invalid_argument);
  std::vector<std::pair<double, double>> single{{0.0, 0.5}};
  CHECK_THROWS_AS(
      static_cast<void>(cylev::test_independent_increments<double>(ens, single, proj, {1.0})),
      std::invalid_argument);
  std::vector<std::pair<double, double>> degenerate{{0.0, 0.5}, {0.75, 0.75}};
  CHECK_THROWS_AS(static_cast<void>(cylev::test_independent_increments<double>(
                      ens, degenerate, proj, {1.0})),
                  std::invalid_argument);
}

TEST_CASE("continuity ladder: dt = 0 has zero exceedance") {
  auto ens = wiener_ensemble(4, 32, 4, 200, 12);
  auto table = cylev::continuity_ladder<double>(ens, 0.25, {0.5, 0.1}, {0.25, 0.0});
  CHECK(table.probs(0, 1) == 0.0);
  CHECK(table.probs(1, 1) == 0.0);
}

TEST_CASE("continuity ladder rejects times off the grid") {
  auto ens = wiener_ensemble(4, 16, 4, 200, 13);
  CHECK_THROWS_AS(static_cast<void>(cylev::continuity_ladder<double>(ens, 0.25, {0.5}, {0.013})),
                  std::invalid_argument);
}

TEST_CASE("stochastic continuity passes for the radonified Wiener") {
  auto ens = wiener_ensemble(8, 128, 8, 2000, 14);
  cylev::ContinuityOptions<double> opts;
  opts.dt_max = 0.25;
  opts.levels = 5;
  opts.floor = 0.05;
  auto rep = cylev::test_stochastic_continuity<double>(ens, 0.25, {1.0, 1.5}, opts);
  CHECK(rep.passed);
}

// Oracle: the Wiener exceedance is Chebyshev-bounded by tail_sq * dt / eps^2
// since E ||Y_{s+dt} - Y_s||^2 = dt sum_k lambda_k^2.
TEST_CASE("wiener continuity ladder respects the Chebyshev oracle") {
  const Index k = 12;
  auto ens = wiener_ensemble(k, 64, k, 4000, 15);
  const double tail_sq = cylev::geometric_spectrum<double>(k, 0.5).squaredNorm();
  const std::vector<double> dts{0.25, 0.125, 0.0625, 0.03125};
  const std::vector<double> epsilons{0.75, 1.0};
  auto table = cylev::continuity_ladder<double>(ens, 0.25, epsilons, dts);
  for (Index e = 0; e < 2; ++e) {
    for (Index j = 0; j < 4; ++j) {
      const double bound = tail_sq * dts[static_cast<std::size_t>(j)] /
                           (epsilons[static_cast<std::size_t>(e)] * epsilons[static_cast<std::size_t>(e)]);
      CHECK(table.probs(e, j) <= bound);
    }
  }
}

// Oracle: for a radonified compound Poisson and eps below the jump scale,
// the exceedance probability is the arrival probability 1 - exp(-lambda dt).
TEST_CASE("compound poisson continuity matches the no-arrival oracle") {
  const double intensity = 2.0;
  const Index k = 8;
  auto op = HilbertSchmidtOp<double>::diagonal(cylev::geometric_spectrum<double>(k, 0.5), k, k);
  auto ens = cylev::radonified_ensemble(CoordinateLevyModel<double>::compound_poisson(intensity),
                                        TimeGrid<double>::uniform(1.0, 64), k, op, k, 4000, 16);
  const std::vector<double> dts{0.25, 0.125, 0.0625};
  auto table = cylev::continuity_ladder<double>(ens, 0.25, {0.01}, dts);
  for (std::size_t j = 0; j < dts.size(); ++j) {
    const double oracle = 1.0 - std::exp(-intensity * dts[j]);
    const double se = std::sqrt(oracle * (1.0 - oracle) / 4000.0);
    CHECK(std::abs(table.probs(0, static_cast<Index>(j)) - oracle) < 3.0 * se);
  }
}

TEST_CASE("cf match holds for the radonified Wiener with a scaled direction") {
  // g = f_0 against diagonal lambda_0 = 1/2: target exp(-u^2/8) at t = 1
  VectorX<double> lambda(4);
  lambda << 0.5, 0.25, 0.125, 0.0625;
  auto op = HilbertSchmidtOp<double>::diagonal(lambda, 4, 4);
  auto g = CoordinateVector<double>::basis(4, 0, Space::G);
  const std::int64_t reps = 10000;
  std::vector<double> u_grid{0.0, 0.5, 1.0, 2.0, 4.0};
  auto rep = cylev::cf_match<double>(CoordinateLevyModel<double>::wiener(), op, g, 1.0, u_grid,
                                     reps, 900);
  CHECK(rep.passed);

  // and the pushed-through target really is exp(-u^2/8)
  auto pushed = cylev::adjoint_apply_truncated(op, g, 4);
  for (double u : u_grid) {
    const auto target =
        cylev::closed_form_cf(CoordinateLevyModel<double>::wiener(), pushed, 1.0, u);
    CHECK(std::abs(target - std::complex<double>(std::exp(-u * u / 8.0), 0.0)) < 1e-15);
  }
}

TEST_CASE("cf match rejects custom jump laws") {
  auto law = cylev::JumpLaw::custom([](double u) { return u - 0.5; });
  auto model = CoordinateLevyModel<double>::compound_poisson(1.0, law);
  auto op = HilbertSchmidtOp<double>::diagonal(cylev::geometric_spectrum<double>(4, 0.5), 4, 4);
  auto g = CoordinateVector<double>::basis(4, 0, Space::G);
  CHECK_THROWS_AS(static_cast<void>(cylev::cf_match<double>(model, op, g, 1.0, {1.0}, 100, 1)),
                  std::invalid_argument);
}

TEST_CASE("zero start and version defect checks") {
  auto ens = wiener_ensemble(6, 16, 6, 200, 18);
  auto zs = cylev::zero_start_check<double>(ens);
  CHECK(zs.statistic == 0.0);
  CHECK(zs.passed);

  auto op = cylev::random_hs_operator<double>(16, 12, cylev::geometric_spectrum<double>(8, 0.7), 3);
  auto vd = cylev::version_defect_check<double>(CoordinateLevyModel<double>::wiener(),
                                                TimeGrid<double>::uniform(1.0, 32), 16, op, 8, 50,
                                                21);
  CHECK(vd.passed);
  CHECK(vd.statistic < 1e-10);
}

TEST_CASE("report pass rules follow their kind") {
  auto p = cylev::make_pvalue_report("p", 0.3, 0.04, 0.05, 10, 1);
  CHECK_FALSE(p.passed);
  auto p2 = cylev::make_pvalue_report("p", 0.3, 0.05, 0.05, 10, 1);
  CHECK(p2.passed);
  auto d = cylev::make_defect_report("d", 0.3, 0.2, 10, 1);
  CHECK_FALSE(d.passed);
  auto d2 = cylev::make_defect_report("d", 0.2, 0.2, 10, 1);
  CHECK(d2.passed);
}
