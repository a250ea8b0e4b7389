#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mep/states.hpp"

namespace mep {

// integral kernel on a grid: (Af)(x_i) = sum_j w a(x_i; x_j) f(x_j)
template <class S>
struct KernelOperatorT {
  GridBasisT<S> basis;
  MatrixXC<S> kernel;
  S weight() const { return basis.weight(); }
};

template <class S, class Derived>
KernelOperatorT<S> make_kernel(const GridBasisT<S>& b,
                               const Eigen::MatrixBase<Derived>& a) {
  MatrixXC<S> kernel = a.template cast<std::complex<S>>();
  if (kernel.rows() != kernel.cols() || kernel.rows() != b.n_points)
    throw Error(Errc::basis_mismatch, "kernel matrix dimension != grid size");
  if (max_nonhermiticity(kernel) >= S(1e-12))
    throw Error(Errc::not_hermitian, "kernel not hermitian to 1e-12");
  return KernelOperatorT<S>{b, std::move(kernel)};
}

// multiplication by g(x): kernel g(x_i) delta_ij / w, so the discrete delta
// absorbs one quadrature weight
template <class S, class Fn>
KernelOperatorT<S> multiplication_kernel(const GridBasisT<S>& b, Fn&& g) {
  MatrixXC<S> kernel = MatrixXC<S>::Zero(b.n_points, b.n_points);
  const VectorX<S> x = b.points();
  const S w = b.weight();
  for (int j = 0; j < b.n_points; ++j) kernel(j, j) = S(g(x[j])) / w;
  return KernelOperatorT<S>{b, std::move(kernel)};
}

template <class S>
KernelOperatorT<S> identity_kernel(const GridBasisT<S>& b) {
  return multiplication_kernel(b, [](S) { return S(1); });
}

template <class S>
KernelOperatorT<S> position_kernel(const GridBasisT<S>& b) {
  return multiplication_kernel(b, [](S x) { return x; });
}

// disjoint open intervals, sorted
template <class S>
struct RegionT {
  std::vector<std::pair<S, S>> intervals;
};

template <class S>
RegionT<S> make_region(std::vector<std::pair<S, S>> intervals) {
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    if (!(intervals[i].first < intervals[i].second))
      throw Error(Errc::domain_violation, "region interval needs l < r");
    if (i > 0 && !(intervals[i - 1].second <= intervals[i].first))
      throw Error(Errc::domain_violation,
                  "region intervals must be sorted and disjoint");
  }
  return RegionT<S>{std::move(intervals)};
}

// open-interval semantics: boundary points are outside
template <class S>
bool region_contains(const RegionT<S>& d, S x) {
  for (const auto& [l, r] : d.intervals)
    if (l < x && x < r) return true;
  return false;
}

template <class S>
struct SymmetrizedPairT {
  WaveFunctionT<S> psi, phi;
  int sign{+1};  // +1 bosons, -1 fermions
  std::complex<S> overlap{};
  S norm_factor{};
};

namespace detail {

template <class S>
void require_normalized_grid(const WaveFunctionT<S>& f, const char* who) {
  if (!std::holds_alternative<GridBasisT<S>>(f.basis))
    throw Error(Errc::basis_mismatch,
                std::string(who) + " must live on a grid basis");
  if (!f.normalized)
    throw Error(Errc::domain_violation,
                std::string(who) + " must be normalized");
}

template <class S>
const GridBasisT<S>& same_grid(const WaveFunctionT<S>& f,
                               const KernelOperatorT<S>& a) {
  require_normalized_grid(f, "wavefunction");
  const auto& g = std::get<GridBasisT<S>>(f.basis);
  if (!(g == a.basis))
    throw Error(Errc::basis_mismatch, "wavefunction and kernel grids differ");
  return a.basis;
}

}  // namespace detail

// Eq-style double quadrature sum_ij w^2 psi*(x_i) a(x_i;x_j) psi(x_j)
template <class S>
S single_average(const WaveFunctionT<S>& psi, const KernelOperatorT<S>& a) {
  detail::same_grid(psi, a);
  const S w = a.weight();
  const std::complex<S> val =
      w * w * (psi.amps.adjoint() * a.kernel * psi.amps)(0);
  if (std::abs(val.imag()) >= S(1e-10))
    throw Error(Errc::internal_check,
                "hermitian kernel average has imaginary residue >= 1e-10");
  return val.real();
}

template <class S>
std::complex<S> cross_average(const WaveFunctionT<S>& psi,
                              const WaveFunctionT<S>& phi,
                              const KernelOperatorT<S>& a) {
  detail::same_grid(psi, a);
  detail::same_grid(phi, a);
  const S w = a.weight();
  return w * w * (psi.amps.adjoint() * a.kernel * phi.amps)(0);
}

template <class S>
std::complex<S> grid_overlap(const WaveFunctionT<S>& psi,
                             const WaveFunctionT<S>& phi) {
  const auto* g = std::get_if<GridBasisT<S>>(&psi.basis);
  if (g == nullptr || !(psi.basis == phi.basis))
    throw Error(Errc::basis_mismatch, "overlap needs one shared grid basis");
  return g->weight() * (psi.amps.adjoint() * phi.amps)(0);
}

template <class S>
SymmetrizedPairT<S> symmetrize(const WaveFunctionT<S>& psi,
                               const WaveFunctionT<S>& phi, int sign) {
  detail::require_normalized_grid(psi, "psi");
  detail::require_normalized_grid(phi, "phi");
  if (sign != 1 && sign != -1)
    throw Error(Errc::domain_violation, "sign must be +1 or -1");
  const std::complex<S> s = grid_overlap(psi, phi);
  if (sign == -1 && std::abs(s) > 1 - S(1e-10))
    throw Error(Errc::pauli_exclusion,
                "fermionic pair with |overlap| at 1 has no state");
  const S n2 = 2 * (1 + S(sign) * std::norm(s));
  return SymmetrizedPairT<S>{psi, phi, sign, s, 1 / std::sqrt(n2)};
}

// expectation of A x I + I x A in the exchange-(anti)symmetrized pair state,
// contracted in closed form; never materializes the two-particle vector
template <class S>
S symmetrized_observable_average(const SymmetrizedPairT<S>& pair,
                                 const KernelOperatorT<S>& a) {
  const S app = single_average(pair.psi, a);
  const S aff = single_average(pair.phi, a);
  const std::complex<S> apf = cross_average(pair.psi, pair.phi, a);
  const S exch = 2 * S(pair.sign) * (apf * std::conj(pair.overlap)).real();
  const S n2 = 1 + S(pair.sign) * std::norm(pair.overlap);
  return (app + aff + exch) / n2;
}

// exact tensor-product reference, capped to keep the n^2 x n^2 build small
template <class S>
S brute_force_pair_average(const WaveFunctionT<S>& psi,
                           const WaveFunctionT<S>& phi, int sign,
                           const KernelOperatorT<S>& a) {
  detail::same_grid(psi, a);
  detail::same_grid(phi, a);
  const int n = a.basis.n_points;
  if (n > 32)
    throw Error(Errc::grid_too_large,
                "brute-force pair evaluation is capped at 32 grid points");
  const auto pair = symmetrize(psi, phi, sign);

  const S w = a.weight();
  VectorXC<S> big(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      big[i * n + j] = pair.norm_factor *
                       (psi.amps[i] * phi.amps[j] +
                        S(sign) * phi.amps[i] * psi.amps[j]);

  const MatrixXC<S> m = w * a.kernel;  // single-particle action matrix
  const MatrixXC<S> eye = MatrixXC<S>::Identity(n, n);
  const MatrixXC<S> two = kron_matrix(m, eye) + kron_matrix(eye, m);
  const std::complex<S> val = w * w * (big.adjoint() * two * big)(0);
  if (std::abs(val.imag()) >= S(1e-10))
    throw Error(Errc::internal_check,
                "brute-force average has imaginary residue >= 1e-10");
  return val.real();
}

template <class S>
KernelOperatorT<S> restrict_to_region(const KernelOperatorT<S>& a,
                                      const RegionT<S>& d) {
  const VectorX<S> x = a.basis.points();
  const int n = a.basis.n_points;
  MatrixXC<S> kernel = a.kernel;
  for (int i = 0; i < n; ++i) {
    if (region_contains(d, x[i])) continue;
    kernel.row(i).setZero();
    kernel.col(i).setZero();
  }
  return KernelOperatorT<S>{a.basis, std::move(kernel)};
}

// both actions of the definition: A and its adjoint must annihilate every
// normalized grid basis function sitting outside D
template <class S>
bool is_d_local(const KernelOperatorT<S>& a, const RegionT<S>& d, S tol) {
  const VectorX<S> x = a.basis.points();
  const S w = a.weight();
  for (int j = 0; j < a.basis.n_points; ++j) {
    if (region_contains(d, x[j])) continue;
    if (w * a.kernel.col(j).norm() >= tol) return false;
    if (w * a.kernel.row(j).norm() >= tol) return false;
  }
  return true;
}

template <class S>
S disturbance(const WaveFunctionT<S>& psi, const WaveFunctionT<S>& phi,
              int sign, const KernelOperatorT<S>& a) {
  const auto pair = symmetrize(psi, phi, sign);
  return std::abs(symmetrized_observable_average(pair, a) -
                  single_average(psi, a));
}

template <class S>
struct SeparationCriteriaT {
  S epsilon{};        // probability threshold for foreign mass in D
  S epsilon_prime{};  // disturbance threshold for normalized D-local probes
  std::vector<KernelOperatorT<S>> probes;
};

template <class S>
struct SeparationCheckT {
  std::string label;
  S value{};
  S threshold{};
  bool pass{};
};

template <class S>
struct SeparationReportT {
  bool pass{};
  std::vector<SeparationCheckT<S>> checks;
};

template <class S>
S region_mass(const WaveFunctionT<S>& f, const RegionT<S>& d) {
  const auto* g = std::get_if<GridBasisT<S>>(&f.basis);
  if (g == nullptr)
    throw Error(Errc::basis_mismatch, "region mass needs a grid basis");
  const VectorX<S> x = g->points();
  S acc = 0;
  for (int j = 0; j < g->n_points; ++j)
    if (region_contains(d, x[j])) acc += std::norm(f.amps[j]);
  return acc * g->weight();
}

// probes restricted to D and scaled to unit operator norm
template <class S>
std::vector<KernelOperatorT<S>> default_probes(const GridBasisT<S>& b,
                                               const RegionT<S>& d) {
  std::vector<KernelOperatorT<S>> probes{
      restrict_to_region(identity_kernel(b), d),
      restrict_to_region(position_kernel(b), d),
      restrict_to_region(multiplication_kernel(b, [](S x) { return x * x; }),
                         d)};
  for (auto& p : probes) {
    const S nrm =
        hermitian_eigenvalues<S>(b.weight() * p.kernel).cwiseAbs().maxCoeff();
    if (nrm > 0) p.kernel /= nrm;
  }
  return probes;
}

template <class S>
SeparationReportT<S> separation_status_check(
    const WaveFunctionT<S>& psi, const std::vector<WaveFunctionT<S>>& others,
    const RegionT<S>& d, const SeparationCriteriaT<S>& c) {
  if (!(c.epsilon > 0) || !(c.epsilon_prime > 0))
    throw Error(Errc::domain_violation, "separation thresholds must be > 0");
  detail::require_normalized_grid(psi, "psi");
  const auto& grid = std::get<GridBasisT<S>>(psi.basis);

  std::vector<KernelOperatorT<S>> probes;
  for (std::size_t k = 0; k < c.probes.size(); ++k) {
    if (!(grid == c.probes[k].basis))
      throw Error(Errc::basis_mismatch, "probe grid differs from psi's");
    if (!is_d_local(c.probes[k], d, S(1e-12)))
      throw Error(Errc::probe_not_local,
                  "probe " + std::to_string(k) + " acts outside the region");
    auto p = c.probes[k];
    const S nrm = hermitian_eigenvalues<S>(grid.weight() * p.kernel)
                      .cwiseAbs()
                      .maxCoeff();
    if (nrm > 0) p.kernel /= nrm;
    probes.push_back(std::move(p));
  }

  SeparationReportT<S> rep;
  rep.pass = true;
  const auto add = [&rep](std::string label, S value, S threshold,
                          bool pass) {
    rep.checks.push_back(
        SeparationCheckT<S>{std::move(label), value, threshold, pass});
    rep.pass = rep.pass && pass;
  };

  const S own_mass = region_mass(psi, d);
  add("psi support meets region", own_mass, S(0), own_mass > 0);

  for (std::size_t j = 0; j < others.size(); ++j) {
    detail::require_normalized_grid(others[j], "other");
    const S mass = region_mass(others[j], d);
    add("other " + std::to_string(j) + " mass in region", mass, c.epsilon,
        mass < c.epsilon);
    for (std::size_t k = 0; k < probes.size(); ++k) {
      for (const int sign : {+1, -1}) {
        const S dist = disturbance(psi, others[j], sign, probes[k]);
        add("disturbance of probe " + std::to_string(k) + " by other " +
                std::to_string(j) + (sign > 0 ? " (bosonic)" : " (fermionic)"),
            dist, c.epsilon_prime, dist < c.epsilon_prime);
      }
    }
  }
  return rep;
}

using KernelOperator = KernelOperatorT<double>;
using Region = RegionT<double>;
using SymmetrizedPair = SymmetrizedPairT<double>;
using SeparationCriteria = SeparationCriteriaT<double>;
using SeparationCheck = SeparationCheckT<double>;
using SeparationReport = SeparationReportT<double>;

}  // namespace mep
