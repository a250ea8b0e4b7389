#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "mep/errors.hpp"

namespace mep {

template <class S>
using VectorX = Eigen::Vector<S, Eigen::Dynamic>;
template <class S>
using VectorXC = Eigen::Vector<std::complex<S>, Eigen::Dynamic>;
template <class S>
using MatrixX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using MatrixXC =
    Eigen::Matrix<std::complex<S>, Eigen::Dynamic, Eigen::Dynamic>;

// Uniform endpoint-inclusive grid: x_j = x_min + j*spacing,
// spacing = (x_max - x_min)/(n_points - 1). Quadrature weight is the
// spacing at every point; states are required to decay at the boundary.
template <class S>
struct GridBasisT {
  S x_min{};
  S x_max{};
  int n_points{};

  S spacing() const { return (x_max - x_min) / S(n_points - 1); }
  S weight() const { return spacing(); }

  VectorX<S> points() const {
    VectorX<S> x(n_points);
    const S h = spacing();
    for (int j = 0; j < n_points; ++j) x[j] = x_min + S(j) * h;
    return x;
  }

  friend bool operator==(const GridBasisT& a, const GridBasisT& b) {
    return a.x_min == b.x_min && a.x_max == b.x_max &&
           a.n_points == b.n_points;
  }
};

// Number basis of the unit-frequency oscillator with effective mass
// mass_scale, displaced to phase-space point (center_q, center_p).
template <class S>
struct FockBasisT {
  int dim{};
  S center_q{};
  S center_p{};
  S mass_scale{1};
  S hbar{1};

  friend bool operator==(const FockBasisT& a, const FockBasisT& b) {
    return a.dim == b.dim && a.center_q == b.center_q &&
           a.center_p == b.center_p && a.mass_scale == b.mass_scale &&
           a.hbar == b.hbar;
  }
};

// Tensor product of independent single-mode number bases.
template <class S>
struct ProductBasisT {
  std::vector<FockBasisT<S>> factors;

  friend bool operator==(const ProductBasisT& a, const ProductBasisT& b) {
    return a.factors == b.factors;
  }
};

template <class S>
using BasisT = std::variant<GridBasisT<S>, FockBasisT<S>, ProductBasisT<S>>;

template <class S>
int dim_of(const BasisT<S>& b) {
  if (const auto* g = std::get_if<GridBasisT<S>>(&b)) return g->n_points;
  if (const auto* f = std::get_if<FockBasisT<S>>(&b)) return f->dim;
  const auto& p = std::get<ProductBasisT<S>>(b);
  int d = 1;
  for (const auto& f : p.factors) d *= f.dim;
  return d;
}

template <class S>
std::string basis_label(const BasisT<S>& b) {
  if (std::holds_alternative<GridBasisT<S>>(b)) return "grid";
  if (std::holds_alternative<FockBasisT<S>>(b)) return "fock";
  return "product";
}

inline bool is_power_of_two(long n) { return n > 0 && (n & (n - 1)) == 0; }

template <class S>
GridBasisT<S> build_grid(S x_min, S x_max, int n_points) {
  if (!(x_max > x_min))
    throw Error(Errc::degenerate_interval,
                "grid interval must satisfy x_max > x_min");
  if (n_points < 8 || !is_power_of_two(n_points))
    throw Error(Errc::non_power_of_two,
                "n_points must be a power of two >= 8, got " +
                    std::to_string(n_points));
  return GridBasisT<S>{x_min, x_max, n_points};
}

using GridBasis = GridBasisT<double>;
using FockBasis = FockBasisT<double>;
using ProductBasis = ProductBasisT<double>;
using Basis = BasisT<double>;

}  // namespace mep
