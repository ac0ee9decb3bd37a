#include <cmath>
#include <vector>

#include "cylev/radonify.hpp"
#include "cylev/rng.hpp"
#include "doctest.h"

using cylev::CoordinateLevyModel;
using cylev::CoordinateVector;
using cylev::CounterEngine;
using cylev::CylindricalPathBundle;
using cylev::HilbertSchmidtOp;
using cylev::Index;
using cylev::MatrixX;
using cylev::Space;
using cylev::TimeGrid;
using cylev::VectorX;

namespace {

CylindricalPathBundle<double> wiener_bundle(Index k, Index steps, std::uint64_t seed) {
  return cylev::simulate_bundle(CoordinateLevyModel<double>::wiener(),
                                TimeGrid<double>::uniform(1.0, steps), k, seed);
}

CoordinateVector<double> random_g(Index k, std::uint64_t seed) {
  CounterEngine rng(seed, cylev::StreamPurpose::Direction, 0);
  VectorX<double> v(k);
  for (Index i = 0; i < k; ++i) v[i] = rng.normal();
  return CoordinateVector<double>(std::move(v), Space::G);
}

}  // namespace

TEST_CASE("truncation zero gives the zero path") {
  auto bundle = wiener_bundle(8, 16, 1);
  auto op = HilbertSchmidtOp<double>::diagonal(cylev::geometric_spectrum<double>(8, 0.5), 8, 8);
  auto path = cylev::radonify_series(bundle, op, 0);
  CHECK(path.values().isZero(0.0));
  CHECK(path.truncation_n() == 0);
  CHECK(path.grid().size() == bundle.grid().size());
}

TEST_CASE("single-triple series reproduces the first coordinate path exactly") {
  auto bundle = wiener_bundle(4, 32, 2);
  VectorX<double> lambda(1);
  lambda << 1.0;
  auto op = HilbertSchmidtOp<double>::diagonal(lambda, 4, 4);
  auto path = cylev::radonify_series(bundle, op, 1);
  CHECK(path.values().col(0) == bundle.paths().col(0));
  for (Index j = 1; j < 4; ++j) CHECK(path.values().col(j).isZero(0.0));
}

TEST_CASE("radonify rejects bad truncations and mismatched spaces") {
  auto bundle = wiener_bundle(8, 8, 3);
  auto op = HilbertSchmidtOp<double>::diagonal(cylev::geometric_spectrum<double>(4, 0.5), 8, 8);
  CHECK_THROWS_AS(cylev::radonify_series(bundle, op, 5), std::invalid_argument);
  auto wrong_dim = HilbertSchmidtOp<double>::diagonal(cylev::geometric_spectrum<double>(4, 0.5), 6, 8);
  CHECK_THROWS_AS(cylev::radonify_series(bundle, wrong_dim, 4), std::invalid_argument);
  auto adj = cylev::hs_adjoint(op);
  CHECK_THROWS_AS(cylev::radonify_series(bundle, adj, 4), std::invalid_argument);
}

// Oracle: with independent coordinates, E||Y_t||^2 = t * sum_k lambda_k^2;
// for lambda_k = 2^-k the sum is 4/3 (up to a < 1e-6 truncation tail).
TEST_CASE("mean squared norm of the radonified Wiener path") {
  const Index n = 12;
  auto op = HilbertSchmidtOp<double>::diagonal(cylev::geometric_spectrum<double>(n, 0.5), n, n);
  auto grid = TimeGrid<double>::uniform(1.0, 1);
  auto model = CoordinateLevyModel<double>::wiener();

  const int reps = 10000;
  double sum = 0.0, sum_sq = 0.0;
  for (int r = 0; r < reps; ++r) {
    auto bundle = cylev::simulate_bundle(model, grid, n, cylev::derived_seed(99, r));
    auto path = cylev::radonify_series(bundle, op, n);
    const double y_sq = path.values().row(grid.size() - 1).squaredNorm();
    sum += y_sq;
    sum_sq += y_sq * y_sq;
  }
  const double mean = sum / reps;
  const double se = std::sqrt((sum_sq / reps - mean * mean) / reps);
  CHECK(std::abs(mean - 4.0 / 3.0) < 3.0 * se);
}

TEST_CASE("version defect vanishes at matched truncation") {
  auto bundle = wiener_bundle(16, 64, 5);
  auto op = cylev::random_hs_operator<double>(16, 12, cylev::geometric_spectrum<double>(10, 0.7), 8);
  auto path = cylev::radonify_series(bundle, op, 10);

  CHECK(cylev::version_defect(path, bundle, op, CoordinateVector<double>::zero(12, Space::G)) == 0.0);

  // diagonal case: both sides equal lambda_j beta_j(t)
  auto diag = HilbertSchmidtOp<double>::diagonal(cylev::geometric_spectrum<double>(16, 0.5), 16, 16);
  auto diag_path = cylev::radonify_series(bundle, diag, 16);
  for (Index j : {0, 3, 15}) {
    const double defect = cylev::version_defect(diag_path, bundle, diag,
                                                CoordinateVector<double>::basis(16, j, Space::G));
    CHECK(defect < 1e-12);
  }
}

TEST_CASE("version defect stays below 1e-10 over random directions") {
  auto bundle = wiener_bundle(64, 128, 21);
  auto op = cylev::random_hs_operator<double>(64, 64, cylev::geometric_spectrum<double>(32, 0.8), 22);
  auto path = cylev::radonify_series(bundle, op, 32);

  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    worst = std::max(worst, cylev::version_defect(path, bundle, op, random_g(64, 3000 + rep)));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("version defect rejects mismatched provenance") {
  auto bundle = wiener_bundle(8, 16, 6);
  auto other = wiener_bundle(8, 16, 7);
  auto op = HilbertSchmidtOp<double>::diagonal(cylev::geometric_spectrum<double>(8, 0.5), 8, 8);
  auto path = cylev::radonify_series(bundle, op, 8);
  auto g = random_g(8, 1);

  CHECK_NOTHROW(static_cast<void>(cylev::version_defect(path, bundle, op, g)));
  CHECK_THROWS_AS(static_cast<void>(cylev::version_defect(path, other, op, g)),
                  std::invalid_argument);
  auto other_op = HilbertSchmidtOp<double>::diagonal(cylev::geometric_spectrum<double>(8, 0.6), 8, 8);
  CHECK_THROWS_AS(static_cast<void>(cylev::version_defect(path, bundle, other_op, g)),
                  std::invalid_argument);
}

TEST_CASE("partial sum gap basics") {
  auto bundle = wiener_bundle(12, 64, 9);
  auto op = HilbertSchmidtOp<double>::diagonal(cylev::geometric_spectrum<double>(12, 0.5), 12, 12);

  CHECK(cylev::partial_sum_gap(bundle, op, 5, 5) == 0.0);

  // one added term: gap = |lambda_k| sup_t |X_t(h_k)|
  const Index k = 3;
  const double lam = std::pow(2.0, -3);
  const double sup = cylev::evaluate(bundle, CoordinateVector<double>::basis(12, k, Space::H))
                         .cwiseAbs()
                         .maxCoeff();
  CHECK(cylev::partial_sum_gap(bundle, op, k, k + 1) == doctest::Approx(lam * sup).epsilon(1e-12));

  CHECK_THROWS_AS(static_cast<void>(cylev::partial_sum_gap(bundle, op, 4, 2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(static_cast<void>(cylev::partial_sum_gap(bundle, op, 0, 13)),
                  std::invalid_argument);
}

// Dual route: the direct difference of radonified partial sums must agree
// with the Parseval form to 1e-10.
TEST_CASE("partial sum gap agrees with the direct path difference") {
  auto bundle = wiener_bundle(32, 128, 10);
  auto op = cylev::random_hs_operator<double>(32, 24, cylev::geometric_spectrum<double>(20, 0.75), 11);

  for (auto [m, n] : std::vector<std::pair<Index, Index>>{{0, 20}, {4, 12}, {10, 20}, {0, 1}}) {
    auto y_m = cylev::radonify_series(bundle, op, m);
    auto y_n = cylev::radonify_series(bundle, op, n);
    const double direct = (y_n.values() - y_m.values()).rowwise().norm().maxCoeff();
    const double parseval = cylev::partial_sum_gap(bundle, op, m, n);
    CHECK(std::abs(direct - parseval) < 1e-10);
  }
}

TEST_CASE("cauchy bound value") {
  CHECK(cylev::cauchy_bound_value(1.0, 0.0, 1.0, 0.0) == 0.0);

  // direct arithmetic of the bound: 2 sqrt(e) / (sqrt(e) - 1)
  const double sqrt_e = std::sqrt(std::exp(1.0));
  const double expect = 2.0 * sqrt_e / (sqrt_e - 1.0);
  CHECK(cylev::cauchy_bound_value(1.0, 0.0, 1.0, 1.0) == doctest::Approx(expect).epsilon(1e-14));
  // the leading constant itself
  CHECK(sqrt_e / (sqrt_e - 1.0) == doctest::Approx(2.54149).epsilon(1e-5));

  // linear in tail_sq at delta = 0
  const double b1 = cylev::cauchy_bound_value(0.7, 0.0, 1.3, 0.5);
  const double b2 = cylev::cauchy_bound_value(0.7, 0.0, 1.3, 1.0);
  CHECK(b2 == doctest::Approx(2.0 * b1).epsilon(1e-14));

  CHECK_THROWS_AS(cylev::cauchy_bound_value(0.0, 0.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(cylev::cauchy_bound_value(1.0, 0.0, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(cylev::cauchy_bound_value(1.0, -0.1, 1.0, 1.0), std::invalid_argument);

  // monotone: increasing in tail_sq and delta, decreasing in rho and epsilon
  CounterEngine rng(31, cylev::StreamPurpose::Generic, 0);
  for (int rep = 0; rep < 50; ++rep) {
    const double eps = 0.1 + rng.uniform(), delta = rng.uniform(), rho = 0.1 + rng.uniform();
    const double tail = rng.uniform();
    const double base = cylev::cauchy_bound_value(eps, delta, rho, tail);
    CHECK(cylev::cauchy_bound_value(eps, delta, rho, tail + 0.5) >= base);
    CHECK(cylev::cauchy_bound_value(eps, delta + 0.5, rho, tail) >= base);
    CHECK(cylev::cauchy_bound_value(eps, delta, rho + 0.5, tail) <= base);
    CHECK(cylev::cauchy_bound_value(eps + 0.5, delta, rho, tail) <= base);
  }
}

TEST_CASE("bare series norm") {
  auto bundle = wiener_bundle(16, 8, 12);
  CHECK(cylev::bare_series_norm(bundle, 0, 1.0) == 0.0);
  CHECK_THROWS_AS(static_cast<void>(cylev::bare_series_norm(bundle, 17, 1.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(static_cast<void>(cylev::bare_series_norm(bundle, 4, 0.33)), std::out_of_range);

  // non-decreasing in n for a fixed replication
  double prev = 0.0;
  for (Index n = 0; n <= 16; ++n) {
    const double cur = cylev::bare_series_norm(bundle, n, 1.0);
    CHECK(cur >= prev);
    prev = cur;
  }
}

// Oracle: each beta_k(1)^2 has mean 1 under the Wiener model, so the mean
// of the squared bare norm is n.
TEST_CASE("bare series norm has chi-square mean") {
  const Index n = 16;
  auto grid = TimeGrid<double>::uniform(1.0, 1);
  auto model = CoordinateLevyModel<double>::wiener();
  const int reps = 5000;
  double sum = 0.0;
  for (int r = 0; r < reps; ++r) {
    auto bundle = cylev::simulate_bundle(model, grid, n, cylev::derived_seed(55, r));
    const double v = cylev::bare_series_norm(bundle, n, 1.0);
    sum += v * v;
  }
  const double mean = sum / reps;
  const double se = std::sqrt(2.0 * n / static_cast<double>(reps));
  CHECK(std::abs(mean - static_cast<double>(n)) < 3.0 * se);
}

TEST_CASE("cauchy probe reports decreasing exceedance with the tail") {
  auto model = CoordinateLevyModel<double>::wiener();
  auto grid = TimeGrid<double>::uniform(1.0, 64);
  auto op = HilbertSchmidtOp<double>::diagonal(cylev::geometric_spectrum<double>(12, 0.5), 12, 12);

  std::vector<std::pair<Index, Index>> pairs{{0, 4}, {4, 8}, {8, 12}};
  auto reports = cylev::cauchy_probe(model, grid, 12, op, pairs, {0.5}, 400, 77);
  REQUIRE(reports.size() == 3);
  CHECK(reports[0].tail_sq > reports[1].tail_sq);
  CHECK(reports[1].tail_sq > reports[2].tail_sq);
  CHECK(reports[0].empirical_prob >= reports[1].empirical_prob);
  CHECK(reports[1].empirical_prob >= reports[2].empirical_prob);
  for (const auto& r : reports) {
    CHECK(r.empirical_prob >= 0.0);
    CHECK(r.empirical_prob <= 1.0);
    CHECK(r.replications == 400);
  }

  CHECK_THROWS_AS(cylev::cauchy_probe(model, grid, 12, op, {{4, 2}}, {0.5}, 10, 1),
                  std::invalid_argument);
}

TEST_CASE("radonified ensembles are reproducible per replication") {
  auto model = CoordinateLevyModel<double>::wiener();
  auto grid = TimeGrid<double>::uniform(1.0, 16);
  auto op = HilbertSchmidtOp<double>::diagonal(cylev::geometric_spectrum<double>(6, 0.5), 6, 6);
  auto ens = cylev::radonified_ensemble(model, grid, 6, op, 6, 50, 123);
  CHECK(ens.replications == 50);
  auto a = ens.generate(7);
  auto b = ens.generate(7);
  auto c = ens.generate(8);
  CHECK(a.values() == b.values());
  CHECK(a.values() != c.values());
  CHECK(a.values().row(0).isZero(0.0));
}
