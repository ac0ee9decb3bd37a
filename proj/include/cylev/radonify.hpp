#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cylev/cylindrical.hpp"
#include "cylev/hilbert.hpp"

namespace cylev {

namespace detail {

inline std::uint64_t hash_word(std::uint64_t h, std::uint64_t w) noexcept { return mix64(h, w); }

template <typename Scalar>
std::uint64_t hash_matrix(std::uint64_t h, const MatrixX<Scalar>& m) noexcept {
  h = hash_word(h, static_cast<std::uint64_t>(m.rows()));
  h = hash_word(h, static_cast<std::uint64_t>(m.cols()));
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) {
      h = hash_word(h, std::bit_cast<std::uint64_t>(static_cast<double>(m(i, j))));
    }
  }
  return h;
}

}  // namespace detail

template <typename Scalar>
std::uint64_t operator_fingerprint(const HilbertSchmidtOp<Scalar>& op) {
  std::uint64_t h = 0x48534f50ULL;  // arbitrary tag
  h = detail::hash_word(h, static_cast<std::uint64_t>(op.dim_domain()));
  h = detail::hash_word(h, static_cast<std::uint64_t>(op.dim_codomain()));
  for (Index k = 0; k < op.rank(); ++k) {
    h = detail::hash_word(h, std::bit_cast<std::uint64_t>(static_cast<double>(op.singular_values()[k])));
  }
  h = detail::hash_matrix(h, op.left());
  h = detail::hash_matrix(h, op.right());
  return h;
}

template <typename Scalar>
std::uint64_t bundle_fingerprint(const CylindricalPathBundle<Scalar>& bundle) {
  std::uint64_t h = 0x42554e44ULL;
  h = detail::hash_word(h, bundle.seed());
  h = detail::hash_word(h, static_cast<std::uint64_t>(bundle.coordinates()));
  h = detail::hash_word(h, static_cast<std::uint64_t>(bundle.grid().size()));
  h = detail::hash_word(h, static_cast<std::uint64_t>(bundle.model().kind()));
  return h;
}

// A G-valued cadlag path on a grid; the output of radonification.
template <typename Scalar>
class VectorPath {
 public:
  VectorPath(TimeGrid<Scalar> grid, MatrixX<Scalar> values, Index truncation_n,
             std::uint64_t provenance = 0)
      : grid_(std::move(grid)),
        values_(std::move(values)),
        truncation_n_(truncation_n),
        provenance_(provenance) {
    if (values_.rows() != grid_.size()) {
      throw std::invalid_argument("VectorPath: value count must equal grid length");
    }
    if (!values_.row(0).isZero(Scalar(0))) {
      throw std::invalid_argument("VectorPath: path must start at the zero vector");
    }
    if (!all_finite(values_)) {
      throw std::invalid_argument("VectorPath: entries must be finite");
    }
  }

  const TimeGrid<Scalar>& grid() const noexcept { return grid_; }
  const MatrixX<Scalar>& values() const noexcept { return values_; }
  Index truncation_n() const noexcept { return truncation_n_; }
  std::uint64_t provenance() const noexcept { return provenance_; }
  Index dim() const noexcept { return values_.cols(); }

  CoordinateVector<Scalar> at(Index i) const {
    return CoordinateVector<Scalar>(values_.row(i).transpose(), Space::G);
  }

 private:
  TimeGrid<Scalar> grid_;
  MatrixX<Scalar> values_;  // grid length x dim(G)
  Index truncation_n_;
  std::uint64_t provenance_;
};

template <typename Scalar>
std::uint64_t radonify_provenance(const CylindricalPathBundle<Scalar>& bundle,
                                  const HilbertSchmidtOp<Scalar>& op, Index truncation_n) {
  return mix64(mix64(bundle_fingerprint(bundle), operator_fingerprint(op)),
               static_cast<std::uint64_t>(truncation_n));
}

// The singular series Y_t = sum_{k<n} lambda_k X_t(h_k) g_k evaluated at
// every grid time.
template <typename Scalar>
VectorPath<Scalar> radonify_series(const CylindricalPathBundle<Scalar>& bundle,
                                   const HilbertSchmidtOp<Scalar>& op, Index truncation_n) {
  if (truncation_n < 0 || truncation_n > op.rank()) {
    std::ostringstream msg;
    msg << "radonify_series: truncation " << truncation_n << " exceeds operator rank " << op.rank();
    throw std::invalid_argument(msg.str());
  }
  if (op.domain() != Space::H) {
    throw std::invalid_argument("radonify_series: operator domain must be H");
  }
  if (op.dim_domain() != bundle.coordinates()) {
    std::ostringstream msg;
    msg << "radonify_series: operator H-dimension " << op.dim_domain()
        << " does not match bundle coordinates " << bundle.coordinates();
    throw std::invalid_argument(msg.str());
  }

  const auto left = op.left().leftCols(truncation_n);
  const auto right = op.right().leftCols(truncation_n);
  const auto lambda = op.singular_values().head(truncation_n);

  MatrixX<Scalar> coords(bundle.grid().size(), truncation_n);
  coords.noalias() = bundle.paths() * left;  // X_t(h_k) per grid time
  MatrixX<Scalar> values(bundle.grid().size(), op.dim_codomain());
  values.noalias() = (coords * lambda.asDiagonal()) * right.transpose();

  return VectorPath<Scalar>(bundle.grid(), std::move(values), truncation_n,
                            radonify_provenance(bundle, op, truncation_n));
}

// Adjoint action truncated to the first n triples: S*_n g = sum_{k<n}
// lambda_k <g_k, g> h_k, expressed with the operator's own triples.
template <typename Scalar>
CoordinateVector<Scalar> adjoint_apply_truncated(const HilbertSchmidtOp<Scalar>& op,
                                                 const CoordinateVector<Scalar>& g, Index n) {
  if (n < 0 || n > op.rank()) {
    throw std::invalid_argument("adjoint_apply_truncated: truncation exceeds operator rank");
  }
  if (g.space() != op.codomain() || g.size() != op.dim_codomain()) {
    throw std::invalid_argument("adjoint_apply_truncated: vector does not live in the codomain");
  }
  VectorX<Scalar> coeffs = op.right().leftCols(n).transpose() * g.coords();
  VectorX<Scalar> out =
      op.left().leftCols(n) * (op.singular_values().head(n).asDiagonal() * coeffs);
  return CoordinateVector<Scalar>(std::move(out), op.domain());
}

// Sup over grid times of |<Y_t, g> - X_t(S*_n g)| at matched truncation.
// Algebraically zero; anything beyond floating error means Y was not built
// from this bundle and operator.
template <typename Scalar>
Scalar version_defect(const VectorPath<Scalar>& path, const CylindricalPathBundle<Scalar>& bundle,
                      const HilbertSchmidtOp<Scalar>& op, const CoordinateVector<Scalar>& g) {
  if (path.provenance() != radonify_provenance(bundle, op, path.truncation_n())) {
    throw std::invalid_argument(
        "version_defect: path provenance does not match this bundle/operator pair");
  }
  if (g.space() != Space::G || g.size() != op.dim_codomain()) {
    throw std::invalid_argument("version_defect: direction must live in G");
  }
  VectorX<Scalar> lhs = path.values() * g.coords();
  VectorX<Scalar> rhs = evaluate(bundle, adjoint_apply_truncated(op, g, path.truncation_n()));
  return (lhs - rhs).template lpNorm<Eigen::Infinity>();
}

// Sup over grid times of ||Y_n(t) - Y_m(t)||, computed through Parseval
// over the orthonormal g_k: sup_t sqrt(sum_{k=m}^{n-1} lambda_k^2 X_t(h_k)^2).
template <typename Scalar>
Scalar partial_sum_gap(const CylindricalPathBundle<Scalar>& bundle,
                       const HilbertSchmidtOp<Scalar>& op, Index m, Index n) {
  if (m < 0 || m > n || n > op.rank()) {
    std::ostringstream msg;
    msg << "partial_sum_gap: need 0 <= m <= n <= rank, got m=" << m << " n=" << n
        << " rank=" << op.rank();
    throw std::invalid_argument(msg.str());
  }
  if (op.dim_domain() != bundle.coordinates()) {
    throw std::invalid_argument("partial_sum_gap: operator/bundle dimension mismatch");
  }
  if (m == n) return Scalar(0);

  MatrixX<Scalar> coords = bundle.paths() * op.left().middleCols(m, n - m);
  VectorX<Scalar> lam_sq = op.singular_values().segment(m, n - m).array().square();
  VectorX<Scalar> sup_sq = coords.array().square().matrix() * lam_sq;
  return std::sqrt(sup_sq.maxCoeff());
}

// The proof-shaped bound sqrt(e)/(sqrt(e)-1) * (delta + 2 tail_sq / (rho^2 eps^2)).
// delta and rho are probe parameters; the bound is reported, not certified.
template <typename Scalar>
Scalar cauchy_bound_value(Scalar epsilon, Scalar delta, Scalar rho, Scalar tail_sq) {
  if (!(epsilon > Scalar(0))) {
    throw std::invalid_argument("cauchy_bound_value: epsilon must be positive");
  }
  if (!(rho > Scalar(0))) {
    throw std::invalid_argument("cauchy_bound_value: rho must be positive");
  }
  if (delta < Scalar(0) || tail_sq < Scalar(0)) {
    throw std::invalid_argument("cauchy_bound_value: delta and tail_sq must be nonnegative");
  }
  const Scalar sqrt_e = std::sqrt(std::exp(Scalar(1)));
  const Scalar front = sqrt_e / (sqrt_e - Scalar(1));
  return front * (delta + Scalar(2) * tail_sq / (rho * rho * epsilon * epsilon));
}

// Norm of the un-radonified partial series sum_{k<n} X_t(e_k) e_k; its
// divergence in n is the contrast radonification removes.
template <typename Scalar>
Scalar bare_series_norm(const CylindricalPathBundle<Scalar>& bundle, Index n, Scalar t) {
  if (n < 0 || n > bundle.coordinates()) {
    std::ostringstream msg;
    msg << "bare_series_norm: truncation " << n << " exceeds bundle coordinates "
        << bundle.coordinates();
    throw std::invalid_argument(msg.str());
  }
  const Index row = bundle.grid().index_of(t);
  return bundle.paths().row(row).head(n).norm();
}

// Empirical tail behaviour of the partial-sum gap for one probe setting.
template <typename Scalar>
struct CauchyProbeReport {
  Index m = 0;
  Index n = 0;
  Scalar epsilon = Scalar(0);
  Scalar empirical_prob = Scalar(0);
  Scalar tail_sq = Scalar(0);
  std::int64_t replications = 0;
};

// Monte Carlo estimate of P(sup_t ||Y_n - Y_m|| > eps) for each probe pair
// and threshold, with one fresh bundle per replication.
template <typename Scalar>
std::vector<CauchyProbeReport<Scalar>> cauchy_probe(
    const CoordinateLevyModel<Scalar>& model, const TimeGrid<Scalar>& grid, Index coordinates,
    const HilbertSchmidtOp<Scalar>& op, const std::vector<std::pair<Index, Index>>& pairs,
    const std::vector<Scalar>& epsilons, std::int64_t replications, std::uint64_t seed) {
  if (replications < 1) {
    throw std::invalid_argument("cauchy_probe: replications must be >= 1");
  }
  for (const auto& [m, n] : pairs) {
    if (m < 0 || m > n || n > op.rank()) {
      std::ostringstream msg;
      msg << "cauchy_probe: invalid probe pair (" << m << ", " << n << ") for rank " << op.rank();
      throw std::invalid_argument(msg.str());
    }
  }

  std::vector<std::int64_t> exceed(pairs.size() * epsilons.size(), 0);
  for (std::int64_t r = 0; r < replications; ++r) {
    auto bundle = simulate_bundle(model, grid, coordinates, derived_seed(seed, r));
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const Scalar gap = partial_sum_gap(bundle, op, pairs[p].first, pairs[p].second);
      for (std::size_t e = 0; e < epsilons.size(); ++e) {
        if (gap > epsilons[e]) ++exceed[p * epsilons.size() + e];
      }
    }
  }

  std::vector<CauchyProbeReport<Scalar>> out;
  out.reserve(exceed.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    for (std::size_t e = 0; e < epsilons.size(); ++e) {
      CauchyProbeReport<Scalar> rep;
      rep.m = pairs[p].first;
      rep.n = pairs[p].second;
      rep.epsilon = epsilons[e];
      rep.empirical_prob = static_cast<Scalar>(exceed[p * epsilons.size() + e]) /
                           static_cast<Scalar>(replications);
      rep.tail_sq = hs_tail_norm_sq(op, pairs[p].first);
      rep.replications = replications;
      out.push_back(rep);
    }
  }
  return out;
}

// Lazy replication-indexed supply of radonified paths; ensembles stream so
// that large R never holds every path in memory at once.
template <typename Scalar>
struct PathEnsemble {
  std::function<VectorPath<Scalar>(std::int64_t)> generate;
  std::int64_t replications = 0;
  std::uint64_t seed = 0;
};

template <typename Scalar>
PathEnsemble<Scalar> radonified_ensemble(const CoordinateLevyModel<Scalar>& model,
                                         const TimeGrid<Scalar>& grid, Index coordinates,
                                         const HilbertSchmidtOp<Scalar>& op, Index truncation_n,
                                         std::int64_t replications, std::uint64_t seed) {
  if (replications < 1) {
    throw std::invalid_argument("radonified_ensemble: replications must be >= 1");
  }
  PathEnsemble<Scalar> ens;
  ens.replications = replications;
  ens.seed = seed;
  ens.generate = [model, grid, coordinates, op, truncation_n, seed](std::int64_t r) {
    auto bundle = simulate_bundle(model, grid, coordinates, derived_seed(seed, r));
    return radonify_series(bundle, op, truncation_n);
  };
  return ens;
}

}  // namespace cylev
