#pragma once

#include <vector>

#include "mep/states.hpp"

namespace mep {

template <class S>
struct ModeMomentsT {
  S Q{};
  S P{};
  S dQ{1};
  S dP{1};
};

template <class S>
struct MomentsT {
  std::vector<ModeMomentsT<S>> modes;
  S hbar{1};
};

template <class S>
MomentsT<S> single_mode(S Q, S P, S dQ, S dP, S hbar) {
  return MomentsT<S>{{ModeMomentsT<S>{Q, P, dQ, dP}}, hbar};
}

// nu = 2 dP dQ / hbar; the packet family lives on the open interval (1, inf)
template <class S>
S nu_from_moments(S dQ, S dP, S hbar) {
  if (!(dQ > 0) || !(dP > 0) || !(hbar > 0))
    throw Error(Errc::domain_violation, "dQ, dP, hbar must be positive");
  const S nu = 2 * dP * dQ / hbar;
  if (std::abs(nu - 1) <= S(1e-12))
    throw Error(Errc::minimal_uncertainty_boundary,
                "moments sit on the minimal-uncertainty boundary nu = 1");
  if (nu < 1)
    throw Error(Errc::uncertainty_violation,
                "2 dP dQ < hbar: no quantum state has these spreads");
  return nu;
}

template <class S>
S lambda_of_nu(S nu) {
  return (nu - 1) / (nu + 1);
}

// S(nu) = (nu+1)/2 ln(nu+1) - (nu-1)/2 ln(nu-1) - ln 2  (nats)
template <class S>
S me_entropy_closed_form(S nu) {
  if (!(nu > 1))
    throw Error(Errc::domain_violation, "entropy closed form requires nu > 1");
  return (nu + 1) / 2 * std::log(nu + 1) - (nu - 1) / 2 * std::log(nu - 1) -
         std::log(S(2));
}

// smallest dim keeping the squared geometric tail lambda^{2 dim} below eps,
// so truncated moments and entropies carry a wide margin; rounded up
template <class S>
int recommended_dim(S nu, S eps = S(1e-10)) {
  const S lam = lambda_of_nu(nu);
  int d = 8;
  if (lam > 0)
    d = static_cast<int>(std::ceil(2 * std::log(eps) / std::log(lam))) + 1;
  const int rounded = ((d + 31) / 32) * 32;
  return std::max(48, rounded);
}

template <class S>
FockBasisT<S> matched_fock_basis(const ModeMomentsT<S>& m, S hbar, int dim) {
  return FockBasisT<S>{dim, m.Q, m.P, m.dP / m.dQ, hbar};
}

template <class S>
int mode_count(const BasisT<S>& basis) {
  if (const auto* pb = std::get_if<ProductBasisT<S>>(&basis))
    return static_cast<int>(pb->factors.size());
  return 1;
}

namespace detail {

// q, p, q^2, p^2, (qp+pq)/2 for one mode, each with exact matrix elements
template <class S>
struct QuadOpsT {
  OperatorT<S> q, p, q2, p2, qp;
};

template <class S>
QuadOpsT<S> quad_ops(const BasisT<S>& basis, S hbar, int mode = 0) {
  if (const auto* g = std::get_if<GridBasisT<S>>(&basis))
    return {position_operator(*g), momentum_operator(*g, hbar),
            position_squared_operator(*g), momentum_squared_operator(*g, hbar),
            symmetrized_qp_operator(*g, hbar)};
  if (const auto* f = std::get_if<FockBasisT<S>>(&basis)) {
    if (f->hbar != hbar)
      throw Error(Errc::basis_mismatch,
                  "fock basis hbar differs from requested hbar");
    return {position_operator(*f), momentum_operator(*f),
            position_squared_operator(*f), momentum_squared_operator(*f),
            symmetrized_qp_operator(*f)};
  }
  const auto& pb = std::get<ProductBasisT<S>>(basis);
  if (mode < 0 || mode >= static_cast<int>(pb.factors.size()))
    throw Error(Errc::domain_violation, "mode index out of range");
  const auto& f = pb.factors[mode];
  if (f.hbar != hbar)
    throw Error(Errc::basis_mismatch,
                "fock basis hbar differs from requested hbar");
  return {embed_in_product(pb, mode, position_operator(f).mat),
          embed_in_product(pb, mode, momentum_operator(f).mat),
          embed_in_product(pb, mode, position_squared_operator(f).mat),
          embed_in_product(pb, mode, momentum_squared_operator(f).mat),
          embed_in_product(pb, mode, symmetrized_qp_operator(f).mat)};
}

}  // namespace detail

// K = (dP/dQ)(q-Q)^2/2 + (dQ/dP)(p-P)^2/2 on the given single-mode basis
template <class S>
OperatorT<S> k_operator(const MomentsT<S>& m, int mode, const BasisT<S>& basis) {
  if (mode < 0 || mode >= static_cast<int>(m.modes.size()))
    throw Error(Errc::domain_violation, "mode index out of range");
  if (std::holds_alternative<ProductBasisT<S>>(basis))
    throw Error(Errc::basis_mismatch,
                "k_operator builds single-mode operators only");
  const auto& mm = m.modes[mode];
  nu_from_moments(mm.dQ, mm.dP, m.hbar);

  const auto ops = detail::quad_ops(basis, m.hbar);
  const S a = (mm.dP / mm.dQ) / 2;
  const S b = (mm.dQ / mm.dP) / 2;
  MatrixXC<S> K = a * ops.q2.mat + b * ops.p2.mat;
  K -= (2 * a * mm.Q) * ops.q.mat;
  K -= (2 * b * mm.P) * ops.p.mat;
  K.diagonal().array() += a * mm.Q * mm.Q + b * mm.P * mm.P;
  K = hermitize(K);
  return OperatorT<S>{basis, std::move(K), true};
}

template <class S>
std::pair<OperatorT<S>, OperatorT<S>> qp_pair(const BasisT<S>& basis, S hbar,
                                              int mode = 0) {
  auto ops = detail::quad_ops(basis, hbar, mode);
  return {std::move(ops.q), std::move(ops.p)};
}

template <class S>
S symmetrized_covariance(const StateOperatorT<S>& rho, S hbar, int mode = 0) {
  const auto ops = detail::quad_ops(rho.basis, hbar, mode);
  const S Q = expectation(rho, ops.q);
  const S P = expectation(rho, ops.p);
  return expectation(rho, ops.qp) - Q * P;
}

template <class S>
struct MEPacketSpecT {
  MomentsT<S> moments;
  std::vector<S> nu;
  BasisT<S> basis;
  int dim{};
};

template <class S>
MEPacketSpecT<S> make_packet_spec(const MomentsT<S>& m, const BasisT<S>& basis) {
  const auto n_modes = m.modes.size();
  if (n_modes == 0)
    throw Error(Errc::domain_violation, "moments carry no modes");

  std::vector<int> mode_dims;
  if (const auto* pb = std::get_if<ProductBasisT<S>>(&basis)) {
    if (pb->factors.size() != n_modes)
      throw Error(Errc::basis_mismatch,
                  "product basis factor count != mode count");
    for (const auto& f : pb->factors) mode_dims.push_back(f.dim);
  } else {
    if (n_modes != 1)
      throw Error(Errc::basis_mismatch,
                  "multi-mode moments need a product basis");
    mode_dims.push_back(dim_of(basis));
  }

  std::vector<S> nu;
  for (std::size_t k = 0; k < n_modes; ++k) {
    const S nuk = nu_from_moments(m.modes[k].dQ, m.modes[k].dP, m.hbar);
    const S tail = std::pow(lambda_of_nu(nuk), S(mode_dims[k]));
    if (!(tail < S(1e-12)))
      throw Error(Errc::truncation_insufficient,
                  "dim too small: lambda^dim = " + std::to_string(tail) +
                      " >= 1e-12 for nu = " + std::to_string(nuk));
    nu.push_back(nuk);
  }
  return MEPacketSpecT<S>{m, std::move(nu), basis, dim_of(basis)};
}

namespace detail {

template <class S>
MatrixXC<S> single_mode_packet_matrix(const MomentsT<S>& m, int mode, S nu,
                                      const BasisT<S>& basis) {
  const auto K = k_operator(m, mode, basis);
  const S c = std::log((nu + 1) / (nu - 1)) / m.hbar;
  const auto B = make_operator(basis, (-c * K.mat).eval(), true);
  const auto E = op_func(B, MatFunc::exp);
  const S tr = E.mat.trace().real();
  if (!(tr > 0) || !std::isfinite(tr))
    throw Error(Errc::truncation_insufficient,
                "packet exponential has nonpositive trace");
  return E.mat / tr;
}

}  // namespace detail

template <class S>
StateOperatorT<S> me_packet(const MEPacketSpecT<S>& spec) {
  const auto& m = spec.moments;
  MatrixXC<S> rho;
  if (const auto* pb = std::get_if<ProductBasisT<S>>(&spec.basis)) {
    rho = MatrixXC<S>::Identity(1, 1);
    for (std::size_t k = 0; k < m.modes.size(); ++k) {
      const BasisT<S> fb(pb->factors[k]);
      rho = kron_matrix(
          rho, detail::single_mode_packet_matrix(m, static_cast<int>(k),
                                                 spec.nu[k], fb));
    }
  } else {
    rho = detail::single_mode_packet_matrix(m, 0, spec.nu[0], spec.basis);
  }
  auto state = make_state(spec.basis, rho);

  // the K quadratic form has no q-p cross term, so the packet must carry
  // zero symmetrized covariance; the classical sampler relies on this
  for (std::size_t k = 0; k < m.modes.size(); ++k) {
    const S cov = symmetrized_covariance(state, m.hbar, static_cast<int>(k));
    if (std::abs(cov) >= S(1e-6))
      throw Error(Errc::internal_check,
                  "packet symmetrized q-p covariance exceeds 1e-6");
  }
  return state;
}

template <class S>
StateOperatorT<S> me_packet(const MomentsT<S>& m, const BasisT<S>& basis) {
  return me_packet(make_packet_spec(m, basis));
}

template <class S>
MomentsT<S> moments_of_state(const StateOperatorT<S>& rho, S hbar) {
  MomentsT<S> out;
  out.hbar = hbar;
  for (int k = 0; k < mode_count(rho.basis); ++k) {
    const auto ops = detail::quad_ops(rho.basis, hbar, k);
    const S Q = expectation(rho, ops.q);
    const S P = expectation(rho, ops.p);
    const S vq = expectation(rho, ops.q2) - Q * Q;
    const S vp = expectation(rho, ops.p2) - P * P;
    if (!(vq >= 0) || !(vp >= 0))
      throw Error(Errc::internal_check, "negative variance from state");
    out.modes.push_back(ModeMomentsT<S>{Q, P, std::sqrt(vq), std::sqrt(vp)});
  }
  return out;
}

// minimal-uncertainty Gaussian, the nu -> 1 limit of the packet family
template <class S>
WaveFunctionT<S> gaussian_packet(const MomentsT<S>& m, const GridBasisT<S>& g) {
  if (m.modes.size() != 1)
    throw Error(Errc::basis_mismatch, "gaussian_packet is single-mode");
  const auto& mm = m.modes[0];
  const S nu = 2 * mm.dP * mm.dQ / m.hbar;
  if (std::abs(nu - 1) > S(1e-9))
    throw Error(Errc::not_minimal,
                "gaussian_packet requires 2 dP dQ = hbar within 1e-9");
  const VectorX<S> x = g.points();
  VectorXC<S> v(g.n_points);
  for (int j = 0; j < g.n_points; ++j) {
    const S arg = -(x[j] - mm.Q) * (x[j] - mm.Q) / (4 * mm.dQ * mm.dQ);
    const S ph = mm.P * x[j] / m.hbar;
    v[j] = std::exp(arg) * std::complex<S>(std::cos(ph), std::sin(ph));
  }
  return make_wavefunction(BasisT<S>(g), std::move(v));
}

using ModeMoments = ModeMomentsT<double>;
using Moments = MomentsT<double>;
using MEPacketSpec = MEPacketSpecT<double>;

}  // namespace mep
