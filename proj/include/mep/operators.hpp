#pragma once

#include <cmath>
#include <numbers>

#include "mep/basis.hpp"

namespace mep {

template <class Derived>
auto hermitize(const Eigen::MatrixBase<Derived>& m) {
  return ((m + m.adjoint()) / 2).eval();
}

template <class Derived>
auto max_nonhermiticity(const Eigen::MatrixBase<Derived>& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

template <class S>
struct OperatorT {
  BasisT<S> basis;
  MatrixXC<S> mat;
  bool hermitian{false};
};

template <class S, class Derived>
OperatorT<S> make_operator(const BasisT<S>& basis,
                           const Eigen::MatrixBase<Derived>& m,
                           bool hermitian) {
  MatrixXC<S> mat = m.template cast<std::complex<S>>();
  if (mat.rows() != mat.cols())
    throw Error(Errc::domain_violation, "operator matrix must be square");
  if (mat.rows() != dim_of(basis))
    throw Error(Errc::basis_mismatch,
                "operator dimension does not match basis dimension");
  if (hermitian && max_nonhermiticity(mat) >= S(1e-12))
    throw Error(Errc::not_hermitian,
                "hermitian flag set but max |M - M^dag| entry >= 1e-12");
  return OperatorT<S>{basis, std::move(mat), hermitian};
}

template <class S>
OperatorT<S> identity_operator(const BasisT<S>& basis) {
  const int n = dim_of(basis);
  return OperatorT<S>{basis, MatrixXC<S>::Identity(n, n), true};
}

template <class S>
OperatorT<S> position_operator(const GridBasisT<S>& b) {
  MatrixXC<S> m = MatrixXC<S>::Zero(b.n_points, b.n_points);
  const VectorX<S> x = b.points();
  for (int j = 0; j < b.n_points; ++j) m(j, j) = x[j];
  return OperatorT<S>{BasisT<S>(b), std::move(m), true};
}

// -i hbar d/dx by discrete-Fourier (spectral) differentiation, treating the
// n samples as one period of length n*spacing; the Nyquist mode is dropped
// and the result symmetrized, so the matrix is exactly Hermitian.
template <class S>
OperatorT<S> momentum_operator(const GridBasisT<S>& b, S hbar) {
  using C = std::complex<S>;
  const int n = b.n_points;
  const S L = S(n) * b.spacing();
  const S two_pi = 2 * std::numbers::pi_v<S>;

  VectorX<S> k(n);
  for (int m = 0; m < n; ++m) {
    int mt = (m <= n / 2) ? m : m - n;
    if (m == n / 2) mt = 0;
    k[m] = two_pi * S(mt) / L;
  }

  // circulant: P_{jl} = c_{(j-l) mod n}, c_d = (hbar/n) sum_m k_m e^{i 2pi m d/n}
  VectorXC<S> c(n);
  for (int d = 0; d < n; ++d) {
    C acc(0, 0);
    for (int m = 0; m < n; ++m) {
      const S phase = two_pi * S(m) * S(d) / S(n);
      acc += k[m] * C(std::cos(phase), std::sin(phase));
    }
    c[d] = acc * (hbar / S(n));
  }

  MatrixXC<S> P(n, n);
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l) P(j, l) = c[(j - l + n) % n];
  P = hermitize(P);
  return OperatorT<S>{BasisT<S>(b), std::move(P), true};
}

// Lowering operator on the truncated number basis: a|n> = sqrt(n)|n-1>.
template <class S>
MatrixXC<S> ladder(int dim) {
  MatrixXC<S> a = MatrixXC<S>::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(S(n));
  return a;
}

template <class S>
OperatorT<S> position_operator(const FockBasisT<S>& b) {
  const MatrixXC<S> a = ladder<S>(b.dim);
  const S c = std::sqrt(b.hbar / (2 * b.mass_scale));
  MatrixXC<S> q = c * (a + a.adjoint());
  q.diagonal().array() += b.center_q;
  return OperatorT<S>{BasisT<S>(b), std::move(q), true};
}

template <class S>
OperatorT<S> momentum_operator(const FockBasisT<S>& b) {
  using C = std::complex<S>;
  const MatrixXC<S> a = ladder<S>(b.dim);
  const C ic = C(0, 1) * std::sqrt(b.hbar * b.mass_scale / 2);
  MatrixXC<S> p = ic * (a.adjoint() - a);
  p.diagonal().array() += b.center_p;
  return OperatorT<S>{BasisT<S>(b), std::move(p), true};
}

// a^2 on the truncated number basis: exact entries, no truncated product
template <class S>
MatrixXC<S> ladder_squared(int dim) {
  MatrixXC<S> a2 = MatrixXC<S>::Zero(dim, dim);
  for (int n = 2; n < dim; ++n) a2(n - 2, n) = std::sqrt(S(n) * S(n - 1));
  return a2;
}

// Squared position/momentum with exact truncated matrix elements. Squaring
// the truncated single-power matrices instead corrupts the top level by
// O(dim) and shifts an eigenvalue into the middle of the spectrum.
template <class S>
OperatorT<S> position_squared_operator(const FockBasisT<S>& b) {
  const MatrixXC<S> a2 = ladder_squared<S>(b.dim);
  const S g2 = b.hbar / (2 * b.mass_scale);
  MatrixXC<S> m = g2 * (a2 + a2.adjoint());
  for (int n = 0; n < b.dim; ++n) m(n, n) = g2 * S(2 * n + 1) + b.center_q * b.center_q;
  const S c = 2 * b.center_q * std::sqrt(g2);
  const MatrixXC<S> a = ladder<S>(b.dim);
  m += c * (a + a.adjoint());
  return OperatorT<S>{BasisT<S>(b), std::move(m), true};
}

template <class S>
OperatorT<S> momentum_squared_operator(const FockBasisT<S>& b) {
  using C = std::complex<S>;
  const MatrixXC<S> a2 = ladder_squared<S>(b.dim);
  const S f2 = b.hbar * b.mass_scale / 2;
  MatrixXC<S> m = -f2 * (a2 + a2.adjoint());
  for (int n = 0; n < b.dim; ++n) m(n, n) = f2 * S(2 * n + 1) + b.center_p * b.center_p;
  const MatrixXC<S> a = ladder<S>(b.dim);
  m += (C(0, 2) * b.center_p * std::sqrt(f2)) * (a.adjoint() - a);
  return OperatorT<S>{BasisT<S>(b), std::move(m), true};
}

// (qp + pq)/2 with exact truncated matrix elements
template <class S>
OperatorT<S> symmetrized_qp_operator(const FockBasisT<S>& b) {
  using C = std::complex<S>;
  const MatrixXC<S> a = ladder<S>(b.dim);
  const MatrixXC<S> a2 = ladder_squared<S>(b.dim);
  const S g = std::sqrt(b.hbar / (2 * b.mass_scale));
  const S f = std::sqrt(b.hbar * b.mass_scale / 2);
  MatrixXC<S> m = (C(0, 1) * (b.hbar / 2)) * (a2.adjoint() - a2);
  m += (b.center_q * f * C(0, 1)) * (a.adjoint() - a);
  m += (b.center_p * g) * (a + a.adjoint());
  m.diagonal().array() += b.center_q * b.center_p;
  return OperatorT<S>{BasisT<S>(b), std::move(m), true};
}

template <class S>
OperatorT<S> position_squared_operator(const GridBasisT<S>& b) {
  MatrixXC<S> m = MatrixXC<S>::Zero(b.n_points, b.n_points);
  const VectorX<S> x = b.points();
  for (int j = 0; j < b.n_points; ++j) m(j, j) = x[j] * x[j];
  return OperatorT<S>{BasisT<S>(b), std::move(m), true};
}

template <class S>
OperatorT<S> momentum_squared_operator(const GridBasisT<S>& b, S hbar) {
  const auto p = momentum_operator(b, hbar);
  return OperatorT<S>{BasisT<S>(b), hermitize(p.mat * p.mat), true};
}

template <class S>
OperatorT<S> symmetrized_qp_operator(const GridBasisT<S>& b, S hbar) {
  const auto q = position_operator(b);
  const auto p = momentum_operator(b, hbar);
  return OperatorT<S>{BasisT<S>(b), hermitize((q.mat * p.mat + p.mat * q.mat) / 2),
                      true};
}

template <class S>
struct HermitianEigT {
  VectorX<S> values;   // ascending
  MatrixXC<S> vectors; // columns
};

template <class S>
HermitianEigT<S> hermitian_eig(const OperatorT<S>& A) {
  if (!A.hermitian)
    throw Error(Errc::not_hermitian, "eigendecomposition requires the hermitian flag");
  Eigen::SelfAdjointEigenSolver<MatrixXC<S>> es(A.mat);
  if (es.info() != Eigen::Success)
    throw Error(Errc::no_convergence, "hermitian eigensolver failed");
  return HermitianEigT<S>{es.eigenvalues(), es.eigenvectors()};
}

enum class MatFunc { exp, log, sqrt };

template <class S>
OperatorT<S> op_func(const OperatorT<S>& A, MatFunc f) {
  const auto eig = hermitian_eig(A);
  VectorX<S> w = eig.values;
  switch (f) {
    case MatFunc::exp:
      w = w.array().exp();
      break;
    case MatFunc::log:
      if ((w.array() <= S(0)).any())
        throw Error(Errc::domain_violation,
                    "log requires strictly positive spectrum");
      w = w.array().log();
      break;
    case MatFunc::sqrt:
      if ((w.array() < S(-1e-12)).any())
        throw Error(Errc::domain_violation,
                    "sqrt requires nonnegative spectrum");
      w = w.array().max(S(0)).sqrt();
      break;
  }
  MatrixXC<S> m = eig.vectors * w.template cast<std::complex<S>>().asDiagonal() *
                  eig.vectors.adjoint();
  m = hermitize(m);
  return OperatorT<S>{A.basis, std::move(m), true};
}

template <class DA, class DB>
auto kron_matrix(const Eigen::MatrixBase<DA>& Aexpr,
                 const Eigen::MatrixBase<DB>& Bexpr) {
  using S = typename Eigen::MatrixBase<DA>::Scalar;
  const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> A = Aexpr;
  const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> B = Bexpr;
  Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> out(A.rows() * B.rows(),
                                                       A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return out;
}

// Single-mode operator acting on mode k of a product basis, identity elsewhere.
template <class S>
OperatorT<S> embed_in_product(const ProductBasisT<S>& pb, int mode,
                              const MatrixXC<S>& single) {
  if (mode < 0 || mode >= static_cast<int>(pb.factors.size()))
    throw Error(Errc::basis_mismatch, "mode index out of range");
  if (single.rows() != pb.factors[mode].dim)
    throw Error(Errc::basis_mismatch, "single-mode operator has wrong dim");
  MatrixXC<S> m = MatrixXC<S>::Identity(1, 1);
  for (int k = 0; k < static_cast<int>(pb.factors.size()); ++k) {
    if (k == mode)
      m = kron_matrix(m, single);
    else
      m = kron_matrix(m, MatrixXC<S>::Identity(pb.factors[k].dim,
                                               pb.factors[k].dim));
  }
  return OperatorT<S>{BasisT<S>(pb), std::move(m),
                      max_nonhermiticity(single) < S(1e-12)};
}

using Operator = OperatorT<double>;
using HermitianEig = HermitianEigT<double>;

}  // namespace mep
