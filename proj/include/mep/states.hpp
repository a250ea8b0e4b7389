#pragma once

#include "mep/operators.hpp"

namespace mep {

template <class S>
struct WaveFunctionT {
  BasisT<S> basis;
  VectorXC<S> amps;  // grid: samples psi(x_j); fock: number-basis amplitudes
  bool normalized{false};
  bool boundary_leak{false};

  // quadrature-weighted coefficient vector; plain matrix algebra on these
  // vectors reproduces all grid inner products
  VectorXC<S> coefficients() const {
    if (const auto* g = std::get_if<GridBasisT<S>>(&basis))
      return amps * std::sqrt(g->weight());
    return amps;
  }
};

template <class S>
S quad_norm(const BasisT<S>& basis, const VectorXC<S>& amps) {
  S n2 = amps.squaredNorm();
  if (const auto* g = std::get_if<GridBasisT<S>>(&basis)) n2 *= g->weight();
  return std::sqrt(n2);
}

template <class S>
WaveFunctionT<S> make_wavefunction(const BasisT<S>& basis, VectorXC<S> amps,
                                   bool normalize = true) {
  if (amps.size() != dim_of(basis))
    throw Error(Errc::basis_mismatch, "amplitude vector length != basis dim");
  if (normalize) {
    const S n = quad_norm(basis, amps);
    if (!(n > S(0)))
      throw Error(Errc::domain_violation, "cannot normalize the zero vector");
    amps /= n;
  } else if (std::abs(quad_norm(basis, amps) - S(1)) > S(1e-10)) {
    throw Error(Errc::domain_violation,
                "wavefunction flagged normalized but norm deviates > 1e-10");
  }
  bool leak = false;
  if (const auto* g = std::get_if<GridBasisT<S>>(&basis))
    leak = std::abs(amps[0]) >= S(1e-8) ||
           std::abs(amps[g->n_points - 1]) >= S(1e-8);
  return WaveFunctionT<S>{basis, std::move(amps), true, leak};
}

template <class S>
struct StateOperatorT {
  BasisT<S> basis;
  MatrixXC<S> mat;  // coefficient convention: trace(mat) = 1
};

template <class S>
VectorX<S> hermitian_eigenvalues(const MatrixXC<S>& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXC<S>> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw Error(Errc::no_convergence, "hermitian eigensolver failed");
  return es.eigenvalues();
}

template <class S, class Derived>
StateOperatorT<S> make_state(const BasisT<S>& basis,
                             const Eigen::MatrixBase<Derived>& m) {
  MatrixXC<S> mat = m.template cast<std::complex<S>>();
  if (mat.rows() != mat.cols() || mat.rows() != dim_of(basis))
    throw Error(Errc::basis_mismatch, "state matrix dimension != basis dim");
  if (max_nonhermiticity(mat) >= S(1e-12))
    throw Error(Errc::not_hermitian, "state operator not hermitian to 1e-12");
  const S tr = mat.trace().real();
  if (std::abs(tr - S(1)) >= S(1e-10))
    throw Error(Errc::domain_violation,
                "state trace deviates from 1 by >= 1e-10");

  // positivity: exact-diagonal and Gershgorin fast paths, else eigenvalues
  const S tol = S(1e-10);
  bool positive = false;
  const auto diag_abs_off = [&]() {
    S m = 0;
    for (Eigen::Index i = 0; i < mat.rows(); ++i)
      for (Eigen::Index j = 0; j < mat.cols(); ++j)
        if (i != j) m = std::max(m, std::abs(mat(i, j)));
    return m;
  };
  if (diag_abs_off() == S(0)) {
    positive = (mat.diagonal().real().array() >= -tol).all();
    if (!positive)
      throw Error(Errc::domain_violation,
                  "state has eigenvalue below -1e-10");
  } else {
    S worst = 0;
    for (Eigen::Index i = 0; i < mat.rows(); ++i) {
      S radius = 0;
      for (Eigen::Index j = 0; j < mat.cols(); ++j)
        if (j != i) radius += std::abs(mat(i, j));
      worst = std::min(worst, mat(i, i).real() - radius);
    }
    positive = worst >= -tol;
    if (!positive) {
      const VectorX<S> w = hermitian_eigenvalues(mat);
      if (w[0] < -tol)
        throw Error(Errc::domain_violation,
                    "state has eigenvalue below -1e-10");
    }
  }
  return StateOperatorT<S>{basis, std::move(mat)};
}

template <class S>
StateOperatorT<S> projector(const WaveFunctionT<S>& psi) {
  const VectorXC<S> c = psi.coefficients();
  return make_state(psi.basis, MatrixXC<S>(c * c.adjoint()));
}

template <class S>
S expectation(const StateOperatorT<S>& rho, const OperatorT<S>& A) {
  if (!(rho.basis == A.basis))
    throw Error(Errc::basis_mismatch,
                "state and operator live in different bases");
  const std::complex<S> tr =
      (rho.mat.array() * A.mat.transpose().array()).sum();
  if (std::abs(tr.imag()) >= S(1e-10))
    throw Error(Errc::internal_check,
                "expectation has imaginary residue >= 1e-10");
  return tr.real();
}

// -sum lambda ln lambda over eigenvalues above 1e-14 (nats)
template <class S>
S entropy_of_spectrum(const VectorX<S>& w) {
  S s = 0;
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (w[i] > S(1e-14)) s -= w[i] * std::log(w[i]);
  return s;
}

template <class S>
S von_neumann_entropy(const StateOperatorT<S>& rho) {
  return entropy_of_spectrum(hermitian_eigenvalues(rho.mat));
}

template <class S>
S purity(const StateOperatorT<S>& rho) {
  return rho.mat.squaredNorm();
}

template <class S>
S trace_distance(const StateOperatorT<S>& a, const StateOperatorT<S>& b) {
  if (!(a.basis == b.basis))
    throw Error(Errc::basis_mismatch,
                "trace distance requires a common basis");
  const VectorX<S> w = hermitian_eigenvalues(MatrixXC<S>(a.mat - b.mat));
  return w.cwiseAbs().sum() / 2;
}

template <class S>
S overlap_fidelity(const WaveFunctionT<S>& psi, const StateOperatorT<S>& rho) {
  if (!(psi.basis == rho.basis))
    throw Error(Errc::basis_mismatch, "fidelity requires a common basis");
  const VectorXC<S> c = psi.coefficients();
  return (c.adjoint() * rho.mat * c)(0, 0).real();
}

using WaveFunction = WaveFunctionT<double>;
using StateOperator = StateOperatorT<double>;

}  // namespace mep
