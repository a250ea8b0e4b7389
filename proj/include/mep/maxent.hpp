#pragma once

#include <array>
#include <vector>

#include "mep/mepacket.hpp"

namespace mep {

template <class S>
struct MaxEntProblemT {
  MomentsT<S> target;  // single mode
  int dim{64};
  S tol{S(1e-9)};
  int max_iter{200};
};

template <class S>
struct MaxEntSolutionT {
  StateOperatorT<S> state;
  std::array<S, 4> multipliers{};  // weights on q, p, q^2, p^2
  std::array<S, 4> residuals{};
  int iterations{};
  std::vector<S> dual_values;  // dual objective at each accepted point
};

namespace detail {

template <class S>
struct GibbsPointT {
  MatrixXC<S> rho;
  S log_z{};
  std::array<S, 4> moments{};
};

template <class S>
S trace_product(const MatrixXC<S>& rho, const MatrixXC<S>& a) {
  return (rho.array() * a.transpose().array()).sum().real();
}

// rho = exp(-sum_i mult_i A_i)/Z, evaluated spectrally with a shift so the
// exponential never overflows
template <class S>
GibbsPointT<S> gibbs_point(const std::array<MatrixXC<S>, 4>& a,
                           const std::array<S, 4>& mult) {
  const MatrixXC<S> h = hermitize(mult[0] * a[0] + mult[1] * a[1] +
                                  mult[2] * a[2] + mult[3] * a[3]);
  Eigen::SelfAdjointEigenSolver<MatrixXC<S>> es(h);
  if (es.info() != Eigen::Success)
    throw Error(Errc::no_convergence, "eigensolver failed on the Gibbs form");
  const VectorX<S> v = es.eigenvalues();
  const S vmin = v.minCoeff();
  VectorX<S> w = (-(v.array() - vmin)).exp();
  const S z_shifted = w.sum();
  if (!(z_shifted > 0) || !std::isfinite(z_shifted))
    throw Error(Errc::no_convergence, "Gibbs normalization is not finite");
  w /= z_shifted;

  GibbsPointT<S> out;
  out.rho = es.eigenvectors() * w.asDiagonal() *
            es.eigenvectors().adjoint();
  out.log_z = std::log(z_shifted) - vmin;
  for (int i = 0; i < 4; ++i) out.moments[i] = trace_product(out.rho, a[i]);
  return out;
}

template <class S>
S dual_value(const GibbsPointT<S>& g, const std::array<S, 4>& mult,
             const std::array<S, 4>& c) {
  S acc = g.log_z;
  for (int i = 0; i < 4; ++i) acc += mult[i] * c[i];
  return acc;
}

template <class S>
S max_abs_residual(const std::array<S, 4>& moments,
                   const std::array<S, 4>& c) {
  S r = 0;
  for (int i = 0; i < 4; ++i) r = std::max(r, std::abs(moments[i] - c[i]));
  return r;
}

// Jacobian of the moment map by symmetric finite differences
template <class S>
MatrixX<S> moment_jacobian(const std::array<MatrixXC<S>, 4>& a,
                           const std::array<S, 4>& mult) {
  MatrixX<S> jac(4, 4);
  for (int j = 0; j < 4; ++j) {
    const S h = S(1e-5) * std::max(std::abs(mult[j]), S(1));
    auto up = mult;
    auto dn = mult;
    up[j] += h;
    dn[j] -= h;
    const auto gu = gibbs_point(a, up);
    const auto gd = gibbs_point(a, dn);
    for (int i = 0; i < 4; ++i)
      jac(i, j) = (gu.moments[i] - gd.moments[i]) / (2 * h);
  }
  return ((jac + jac.transpose()) / 2).eval();
}

}  // namespace detail

template <class S>
MaxEntSolutionT<S> solve_maxent(const MaxEntProblemT<S>& p) {
  if (p.target.modes.size() != 1)
    throw Error(Errc::domain_violation, "maxent targets a single mode");
  if (!(p.tol > 0) || p.max_iter < 1)
    throw Error(Errc::domain_violation, "tol must be positive, max_iter >= 1");
  const auto& mm = p.target.modes[0];
  const S hbar = p.target.hbar;
  if (!(mm.dQ > 0) || !(mm.dP > 0) || !(hbar > 0))
    throw Error(Errc::domain_violation, "dQ, dP, hbar must be positive");
  const S nu = 2 * mm.dP * mm.dQ / hbar;
  if (nu <= 1)
    throw Error(Errc::infeasible,
                "2 dP dQ <= hbar: no quantum state has these spreads");
  if (nu <= 1 + S(1e-6))
    throw Error(Errc::domain_violation,
                "maxent requires nu > 1 + 1e-6, strictly inside the family");
  const S lam = lambda_of_nu(nu);
  if (p.dim < 8 || std::pow(lam, S(p.dim)) >= S(1e-12))
    throw Error(Errc::truncation_insufficient,
                "dim too small for the implied nu: lambda^dim >= 1e-12");

  const BasisT<S> basis(matched_fock_basis(mm, hbar, p.dim));
  const auto ops = detail::quad_ops(basis, hbar);
  const std::array<MatrixXC<S>, 4> a{ops.q.mat, ops.p.mat, ops.q2.mat,
                                     ops.p2.mat};
  const std::array<S, 4> c{mm.Q, mm.P, mm.dQ * mm.dQ + mm.Q * mm.Q,
                           mm.dP * mm.dP + mm.P * mm.P};

  std::array<S, 4> mult{0, 0, 1 / (2 * mm.dQ * mm.dQ),
                        1 / (2 * mm.dP * mm.dP)};
  auto cur = detail::gibbs_point(a, mult);
  S dual = detail::dual_value(cur, mult, c);

  MaxEntSolutionT<S> sol;
  sol.dual_values.push_back(dual);

  for (int iter = 0; iter < p.max_iter; ++iter) {
    if (detail::max_abs_residual(cur.moments, c) < p.tol) {
      // one undamped step to polish past the finite-difference floor
      const MatrixX<S> jac = detail::moment_jacobian(a, mult);
      VectorX<S> f(4);
      for (int i = 0; i < 4; ++i) f[i] = cur.moments[i] - c[i];
      const VectorX<S> step = (-jac).ldlt().solve(f);
      auto polished = mult;
      for (int i = 0; i < 4; ++i) polished[i] += step[i];
      const auto pg = detail::gibbs_point(a, polished);
      if (detail::max_abs_residual(pg.moments, c) <
          detail::max_abs_residual(cur.moments, c)) {
        mult = polished;
        cur = pg;
        sol.dual_values.push_back(detail::dual_value(cur, mult, c));
      }
      sol.state = make_state(basis, cur.rho);
      sol.multipliers = mult;
      for (int i = 0; i < 4; ++i) sol.residuals[i] = cur.moments[i] - c[i];
      sol.iterations = iter;
      return sol;
    }

    const MatrixX<S> jac = detail::moment_jacobian(a, mult);
    VectorX<S> f(4);
    for (int i = 0; i < 4; ++i) f[i] = cur.moments[i] - c[i];
    const VectorX<S> step = (-jac).ldlt().solve(f);

    S t = 1;
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving) {
      auto trial = mult;
      for (int i = 0; i < 4; ++i) trial[i] += t * step[i];
      auto tg = detail::gibbs_point(a, trial);
      const S td = detail::dual_value(tg, trial, c);
      // the dual must never rise across an accepted step beyond roundoff
      if (td <= dual + S(1e-12)) {
        mult = trial;
        cur = std::move(tg);
        dual = td;
        sol.dual_values.push_back(dual);
        accepted = true;
        break;
      }
      t /= 2;
    }
    if (!accepted)
      throw Error(Errc::no_convergence,
                  "line search stalled before reaching tol");
  }
  throw Error(Errc::no_convergence, "moment residuals above tol at max_iter");
}

using MaxEntProblem = MaxEntProblemT<double>;
using MaxEntSolution = MaxEntSolutionT<double>;

}  // namespace mep
