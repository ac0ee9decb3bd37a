#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "cylev/rng.hpp"

namespace cylev {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;

// Which ambient space a coordinate vector lives in. Operators map H -> G;
// adjoints map G -> H.
enum class Space { H, G };

inline const char* to_cstr(Space s) noexcept { return s == Space::H ? "H" : "G"; }

// Pairwise orthonormality is enforced to 100x the Gram-Schmidt drift
// observed at K <= 1024 in double precision.
inline constexpr double kOrthonormalTol = 1e-10;

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

// An element of a separable Hilbert space written in coordinates against a
// fixed complete orthonormal system, truncated to finitely many entries.
template <typename Scalar>
class CoordinateVector {
 public:
  CoordinateVector(VectorX<Scalar> coords, Space space)
      : coords_(std::move(coords)), space_(space) {
    if (coords_.size() < 1) {
      throw std::invalid_argument("CoordinateVector: needs at least one coordinate");
    }
    if (!all_finite(coords_)) {
      throw std::invalid_argument("CoordinateVector: coordinates must be finite");
    }
  }

  static CoordinateVector zero(Index k, Space space) {
    return CoordinateVector(VectorX<Scalar>::Zero(k), space);
  }

  // j-th canonical basis vector e_j.
  static CoordinateVector basis(Index k, Index j, Space space) {
    if (j < 0 || j >= k) {
      throw std::out_of_range("CoordinateVector::basis: index out of range");
    }
    VectorX<Scalar> v = VectorX<Scalar>::Zero(k);
    v[j] = Scalar(1);
    return CoordinateVector(std::move(v), space);
  }

  const VectorX<Scalar>& coords() const noexcept { return coords_; }
  Space space() const noexcept { return space_; }
  Index size() const noexcept { return coords_.size(); }
  Scalar operator[](Index i) const { return coords_[i]; }

 private:
  VectorX<Scalar> coords_;
  Space space_;
};

namespace detail {

template <typename Scalar>
void require_compatible(const CoordinateVector<Scalar>& u, const CoordinateVector<Scalar>& v,
                        const char* op) {
  if (u.space() != v.space()) {
    std::ostringstream msg;
    msg << op << ": space mismatch (" << to_cstr(u.space()) << " vs " << to_cstr(v.space()) << ")";
    throw std::invalid_argument(msg.str());
  }
  if (u.size() != v.size()) {
    std::ostringstream msg;
    msg << op << ": dimension mismatch in " << to_cstr(u.space()) << " (" << u.size() << " vs "
        << v.size() << ")";
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace detail

template <typename Scalar>
Scalar inner(const CoordinateVector<Scalar>& u, const CoordinateVector<Scalar>& v) {
  detail::require_compatible(u, v, "inner");
  return u.coords().dot(v.coords());
}

template <typename Scalar>
Scalar norm(const CoordinateVector<Scalar>& u) {
  return u.coords().norm();
}

template <typename Scalar>
CoordinateVector<Scalar> linear_combination(Scalar a, const CoordinateVector<Scalar>& u, Scalar b,
                                            const CoordinateVector<Scalar>& v) {
  detail::require_compatible(u, v, "linear_combination");
  return CoordinateVector<Scalar>(a * u.coords() + b * v.coords(), u.space());
}

// A Hilbert-Schmidt operator between truncated spaces, stored as its
// singular triples (lambda_k, h_k, g_k): S u = sum_k lambda_k <h_k, u> g_k.
// Columns of left()/right() are the h_k / g_k.
template <typename Scalar>
class HilbertSchmidtOp {
 public:
  HilbertSchmidtOp(VectorX<Scalar> singular_values, MatrixX<Scalar> left, MatrixX<Scalar> right,
                   Space domain = Space::H, Space codomain = Space::G)
      : lambda_(std::move(singular_values)),
        left_(std::move(left)),
        right_(std::move(right)),
        domain_(domain),
        codomain_(codomain) {
    const Index n = lambda_.size();
    if (left_.cols() != n || right_.cols() != n) {
      throw std::invalid_argument("HilbertSchmidtOp: triple count mismatch between lambda and vectors");
    }
    if (n > left_.rows() || n > right_.rows()) {
      throw std::invalid_argument("HilbertSchmidtOp: more triples than ambient dimensions allow");
    }
    if (!all_finite(lambda_) || !all_finite(left_) || !all_finite(right_)) {
      throw std::invalid_argument("HilbertSchmidtOp: entries must be finite");
    }
    check_orthonormal(left_, "left");
    check_orthonormal(right_, "right");
  }

  // Diagonal operator: h_k = e_k in the domain, g_k = f_k in the codomain.
  static HilbertSchmidtOp diagonal(VectorX<Scalar> singular_values, Index dim_domain,
                                   Index dim_codomain) {
    const Index n = singular_values.size();
    MatrixX<Scalar> left = MatrixX<Scalar>::Identity(dim_domain, n);
    MatrixX<Scalar> right = MatrixX<Scalar>::Identity(dim_codomain, n);
    return HilbertSchmidtOp(std::move(singular_values), std::move(left), std::move(right));
  }

  const VectorX<Scalar>& singular_values() const noexcept { return lambda_; }
  const MatrixX<Scalar>& left() const noexcept { return left_; }
  const MatrixX<Scalar>& right() const noexcept { return right_; }
  Space domain() const noexcept { return domain_; }
  Space codomain() const noexcept { return codomain_; }
  Index rank() const noexcept { return lambda_.size(); }
  Index dim_domain() const noexcept { return left_.rows(); }
  Index dim_codomain() const noexcept { return right_.rows(); }

  CoordinateVector<Scalar> left_vector(Index k) const {
    return CoordinateVector<Scalar>(left_.col(k), domain_);
  }
  CoordinateVector<Scalar> right_vector(Index k) const {
    return CoordinateVector<Scalar>(right_.col(k), codomain_);
  }

  Scalar hs_norm_sq() const noexcept { return lambda_.squaredNorm(); }
  Scalar hs_norm() const noexcept { return lambda_.norm(); }

 private:
  static void check_orthonormal(const MatrixX<Scalar>& vecs, const char* side) {
    const Index n = vecs.cols();
    MatrixX<Scalar> gram = vecs.transpose() * vecs;
    const double defect = (gram - MatrixX<Scalar>::Identity(n, n)).template lpNorm<Eigen::Infinity>();
    if (!(defect < kOrthonormalTol)) {
      std::ostringstream msg;
      msg << "HilbertSchmidtOp: " << side << " vectors not orthonormal (defect " << defect << ")";
      throw std::invalid_argument(msg.str());
    }
  }

  VectorX<Scalar> lambda_;
  MatrixX<Scalar> left_;   // dim_domain x rank
  MatrixX<Scalar> right_;  // dim_codomain x rank
  Space domain_;
  Space codomain_;
};

// S u = sum_k lambda_k <h_k, u> g_k.
template <typename Scalar>
CoordinateVector<Scalar> hs_apply(const HilbertSchmidtOp<Scalar>& op,
                                  const CoordinateVector<Scalar>& u) {
  if (u.space() != op.domain()) {
    std::ostringstream msg;
    msg << "hs_apply: vector lives in " << to_cstr(u.space()) << ", operator domain is "
        << to_cstr(op.domain());
    throw std::invalid_argument(msg.str());
  }
  if (u.size() != op.dim_domain()) {
    std::ostringstream msg;
    msg << "hs_apply: dimension mismatch (" << u.size() << " vs " << op.dim_domain() << ")";
    throw std::invalid_argument(msg.str());
  }
  VectorX<Scalar> coeffs = op.left().transpose() * u.coords();
  VectorX<Scalar> out = op.right() * (op.singular_values().asDiagonal() * coeffs);
  return CoordinateVector<Scalar>(std::move(out), op.codomain());
}

// Adjoint swaps the roles of the singular vectors and keeps lambda.
template <typename Scalar>
HilbertSchmidtOp<Scalar> hs_adjoint(const HilbertSchmidtOp<Scalar>& op) {
  return HilbertSchmidtOp<Scalar>(op.singular_values(), op.right(), op.left(), op.codomain(),
                                  op.domain());
}

// Tail sum sum_{k >= m} lambda_k^2; the quantity controlling the sup-norm
// gap between radonified partial sums.
template <typename Scalar>
Scalar hs_tail_norm_sq(const HilbertSchmidtOp<Scalar>& op, Index m) {
  if (m < 0 || m > op.rank()) {
    std::ostringstream msg;
    msg << "hs_tail_norm_sq: index " << m << " outside [0, " << op.rank() << "]";
    throw std::out_of_range(msg.str());
  }
  return op.singular_values().tail(op.rank() - m).squaredNorm();
}

// Modified Gram-Schmidt with one reorthogonalization pass; columns are
// orthonormalized in place.
template <typename Scalar>
void modified_gram_schmidt(MatrixX<Scalar>& m) {
  const Index n = m.cols();
  for (int pass = 0; pass < 2; ++pass) {
    for (Index j = 0; j < n; ++j) {
      for (Index i = 0; i < j; ++i) {
        m.col(j) -= m.col(i).dot(m.col(j)) * m.col(i);
      }
      const Scalar nrm = m.col(j).norm();
      if (!(nrm > Scalar(1e-12))) {
        throw std::runtime_error("modified_gram_schmidt: rank-deficient columns");
      }
      m.col(j) /= nrm;
    }
  }
}

// Test/experiment fixture: orthonormalized i.i.d. Gaussian singular vectors
// with caller-chosen singular value decay.
template <typename Scalar>
HilbertSchmidtOp<Scalar> random_hs_operator(Index dim_domain, Index dim_codomain,
                                            const VectorX<Scalar>& singular_values,
                                            std::uint64_t seed) {
  const Index n = singular_values.size();
  if (n > dim_domain || n > dim_codomain) {
    throw std::invalid_argument("random_hs_operator: more triples than ambient dimensions allow");
  }
  MatrixX<Scalar> left(dim_domain, n);
  MatrixX<Scalar> right(dim_codomain, n);
  for (Index j = 0; j < n; ++j) {
    CounterEngine left_rng(seed, StreamPurpose::OrthonormalFixture, 2 * static_cast<std::uint64_t>(j));
    CounterEngine right_rng(seed, StreamPurpose::OrthonormalFixture,
                            2 * static_cast<std::uint64_t>(j) + 1);
    for (Index i = 0; i < dim_domain; ++i) {
      left(i, j) = static_cast<Scalar>(left_rng.normal());
    }
    for (Index i = 0; i < dim_codomain; ++i) {
      right(i, j) = static_cast<Scalar>(right_rng.normal());
    }
  }
  modified_gram_schmidt(left);
  modified_gram_schmidt(right);
  return HilbertSchmidtOp<Scalar>(singular_values, std::move(left), std::move(right));
}

// Geometric decay lambda_k = ratio^k, the workhorse spectrum in tests.
template <typename Scalar>
VectorX<Scalar> geometric_spectrum(Index n, Scalar ratio) {
  VectorX<Scalar> lambda(n);
  Scalar v = Scalar(1);
  for (Index k = 0; k < n; ++k) {
    lambda[k] = v;
    v *= ratio;
  }
  return lambda;
}

}  // namespace cylev
