#pragma once

#include <complex>
#include <random>

#include "mep/states.hpp"

namespace mep::testing {

inline MatrixXC<double> random_hermitian(int dim, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  MatrixXC<double> m(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) m(i, j) = {nd(gen), nd(gen)};
  return hermitize(m);
}

inline VectorXC<double> random_complex_vector(int dim, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  VectorXC<double> v(dim);
  for (int i = 0; i < dim; ++i) v[i] = {nd(gen), nd(gen)};
  return v;
}

// unnormalized Gaussian samples exp(-(x-Q)^2/(4 dQ^2) + i P x / hbar)
template <class S>
VectorXC<S> gaussian_samples(const GridBasisT<S>& g, S Q, S P, S dQ, S hbar) {
  const VectorX<S> x = g.points();
  VectorXC<S> v(g.n_points);
  for (int j = 0; j < g.n_points; ++j) {
    const S arg = -(x[j] - Q) * (x[j] - Q) / (4 * dQ * dQ);
    const S ph = P * x[j] / hbar;
    v[j] = std::exp(arg) * std::complex<S>(std::cos(ph), std::sin(ph));
  }
  return v;
}

template <class S>
WaveFunctionT<S> gaussian_wf(const GridBasisT<S>& g, S Q, S P, S dQ, S hbar) {
  return make_wavefunction(BasisT<S>(g), gaussian_samples(g, Q, P, dQ, hbar));
}

}  // namespace mep::testing
