#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "mep/mepacket.hpp"

using namespace mep;
using namespace mep::testing;

namespace {

StateOperator fock_packet(double Q, double P, double dQ, double dP,
                          double hbar, int dim = 0) {
  const auto m = single_mode(Q, P, dQ, dP, hbar);
  const double nu = 2 * dP * dQ / hbar;
  if (dim == 0) dim = recommended_dim(nu);
  return me_packet(m, Basis(matched_fock_basis(m.modes[0], hbar, dim)));
}

}  // namespace

TEST_CASE("nu from moments") {
  CHECK(nu_from_moments(1.0, 1.0, 1.0) == doctest::Approx(2.0));
  CHECK(nu_from_moments(2.0, 2.0, 1.0) == doctest::Approx(8.0));
  CHECK_THROWS_AS(nu_from_moments(1.0, 0.5, 1.0), Error);
  try {
    nu_from_moments(1.0, 0.5, 1.0);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::minimal_uncertainty_boundary);
  }
  try {
    nu_from_moments(0.3, 0.3, 1.0);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::uncertainty_violation);
  }
  CHECK_THROWS_AS(nu_from_moments(-1.0, 1.0, 1.0), Error);
}

TEST_CASE("entropy closed form") {
  CHECK(std::abs(me_entropy_closed_form(1.0 + 1e-9)) < 1e-7);
  CHECK(me_entropy_closed_form(3.0) ==
        doctest::Approx(2 * std::log(2.0)).epsilon(1e-12));
  CHECK(me_entropy_closed_form(2.0) ==
        doctest::Approx(1.5 * std::log(3.0) - std::log(2.0)).epsilon(1e-12));

  double prev = me_entropy_closed_form(1.1);
  for (int i = 2; i <= 90; ++i) {
    const double s = me_entropy_closed_form(1.0 + 0.1 * i);
    CHECK(s > prev);
    prev = s;
  }

  CHECK_THROWS_AS(me_entropy_closed_form(1.0), Error);
  CHECK_THROWS_AS(me_entropy_closed_form(0.5), Error);
}

TEST_CASE("k operator spectrum on matched number basis") {
  const auto m = single_mode(0.0, 0.0, 1.0, 1.0, 1.0);
  const Basis fb(matched_fock_basis(m.modes[0], 1.0, 64));
  const auto K = k_operator(m, 0, fb);
  const auto eig = hermitian_eig(K);
  CHECK(eig.values[0] == doctest::Approx(0.5).epsilon(1e-9));
  for (int n = 0; n < 40; ++n)
    CHECK(std::abs(eig.values[n] - (n + 0.5)) / (n + 0.5) < 1e-6);
}

TEST_CASE("k operator spectrum is translation invariant") {
  const Basis fb(FockBasis{64, 0, 0, 1.0, 1.0});
  const auto e0 = hermitian_eig(k_operator(single_mode(0.0, 0.0, 1.0, 1.0, 1.0), 0, fb));
  const auto e1 = hermitian_eig(k_operator(single_mode(0.25, -0.3, 1.0, 1.0, 1.0), 0, fb));
  for (int n = 0; n < 24; ++n)
    CHECK(std::abs(e0.values[n] - e1.values[n]) < 1e-8);
}

TEST_CASE("k operator grid spectrum matches number-basis spectrum") {
  const auto m = single_mode(0.0, 0.0, 1.0, 1.0, 1.0);
  const auto g = build_grid(-12.0, 12.0, 256);
  const auto eg = hermitian_eig(k_operator(m, 0, Basis(g)));
  for (int n = 0; n < 20; ++n)
    CHECK(std::abs(eg.values[n] - (n + 0.5)) < 1e-5);
}

TEST_CASE("packet moments round-trip and purity") {
  const auto rho = fock_packet(0.0, 0.0, 1.0, 1.0, 1.0, 64);
  const auto m = moments_of_state(rho, 1.0);
  CHECK(std::abs(m.modes[0].Q) < 1e-6);
  CHECK(std::abs(m.modes[0].P) < 1e-6);
  CHECK(m.modes[0].dQ == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(m.modes[0].dP == doctest::Approx(1.0).epsilon(1e-6));

  // geometric-series reference: purity = sum ((1-l) l^n)^2
  const double lam = lambda_of_nu(2.0);
  double series = 0;
  for (int n = 0; n < 64; ++n)
    series += std::pow((1 - lam) * std::pow(lam, n), 2);
  CHECK(purity(rho) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(purity(rho) == doctest::Approx(series).epsilon(1e-8));
}

TEST_CASE("packet eigenvalue law in the matched basis") {
  const auto rho = fock_packet(0.0, 0.0, 1.0, 1.0, 1.0, 64);
  const double lam = 1.0 / 3.0;

  double max_off = 0;
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < 64; ++j)
      if (i != j) max_off = std::max(max_off, std::abs(rho.mat(i, j)));
  REQUIRE(max_off < 1e-12);

  for (int n = 0; n < 64; ++n) {
    const double expected = (1 - lam) * std::pow(lam, n);
    if (expected <= 1e-10) break;
    CHECK(std::abs(rho.mat(n, n).real() - expected) / expected < 1e-8);
    if (n > 0)
      CHECK(rho.mat(n, n).real() / rho.mat(n - 1, n - 1).real() ==
            doctest::Approx(lam).epsilon(1e-8));
  }
}

TEST_CASE("near-minimal packet is nearly pure") {
  const double nu = 1.01;
  const double d = std::sqrt(nu / 2.0);
  const auto rho = fock_packet(0.0, 0.0, d, d, 1.0);
  const double lam = lambda_of_nu(nu);
  CHECK(purity(rho) >= 0.99);
  CHECK(purity(rho) == doctest::Approx((1 - lam) / (1 + lam)).epsilon(1e-9));
}

TEST_CASE("packet construction guards") {
  const auto m = single_mode(0.0, 0.0, 2.0, 2.0, 1.0);  // nu = 8
  CHECK_THROWS_AS(me_packet(m, Basis(matched_fock_basis(m.modes[0], 1.0, 32))),
                  Error);
  try {
    me_packet(m, Basis(matched_fock_basis(m.modes[0], 1.0, 32)));
  } catch (const Error& e) {
    CHECK(e.code() == Errc::truncation_insufficient);
  }

  const auto bad = single_mode(0.0, 0.0, 0.5, 0.5, 1.0);  // nu = 0.5
  CHECK_THROWS_AS(me_packet(bad, Basis(FockBasis{48, 0, 0, 1.0, 1.0})), Error);
}

TEST_CASE("packet has zero symmetrized q-p covariance") {
  const auto g = build_grid(-12.0, 12.0, 256);
  const auto rho = me_packet(single_mode(1.0, -1.0, 1.2, 0.9, 1.0), Basis(g));
  CHECK(std::abs(symmetrized_covariance(rho, 1.0)) < 1e-6);
}

TEST_CASE("numeric entropy equals the closed form") {
  for (const double nu : {1.5, 2.0, 3.0, 6.0}) {
    const double d = std::sqrt(nu / 2.0);
    const auto rho = fock_packet(0.4, -0.2, d, d, 1.0);
    CHECK(von_neumann_entropy(rho) ==
          doctest::Approx(me_entropy_closed_form(nu)).epsilon(1e-6));
  }
}

TEST_CASE("entropy agrees between grid and number-basis representations") {
  const auto m = single_mode(0.0, 0.0, 1.0, 1.0, 1.0);
  const auto fock = me_packet(m, Basis(matched_fock_basis(m.modes[0], 1.0, 64)));
  const auto grid = me_packet(m, Basis(build_grid(-12.0, 12.0, 256)));
  CHECK(std::abs(von_neumann_entropy(fock) - von_neumann_entropy(grid)) < 1e-6);
}

TEST_CASE("normalization must come from the computed trace") {
  // literal prefactor 2/(nu^2-1) does not normalize the exponential: its
  // trace is 1/sqrt(nu^2-1), reproduced here to 1e-9
  for (const double nu : {1.5, 2.0, 3.0}) {
    const double d = std::sqrt(nu / 2.0);
    const auto m = single_mode(0.0, 0.0, d, d, 1.0);
    const Basis fb(matched_fock_basis(m.modes[0], 1.0, recommended_dim(nu)));
    const auto K = k_operator(m, 0, fb);
    const double c = std::log((nu + 1) / (nu - 1));
    const auto E = op_func(make_operator(fb, (-c * K.mat).eval(), true),
                           MatFunc::exp);
    const double literal_trace = 2.0 / (nu * nu - 1) * E.mat.trace().real();
    CHECK(literal_trace ==
          doctest::Approx(1.0 / std::sqrt(nu * nu - 1)).epsilon(1e-9));
    CHECK(std::abs(literal_trace - 1.0) > 0.1);
  }
}

TEST_CASE("gaussian packet") {
  const auto g = build_grid(-10.0, 10.0, 256);
  const double d = std::sqrt(0.5);

  const auto psi = gaussian_packet(single_mode(0.0, 0.0, d, d, 1.0), g);
  CHECK(quad_norm(psi.basis, psi.amps) == doctest::Approx(1.0).epsilon(1e-12));
  const auto m = moments_of_state(projector(psi), 1.0);
  CHECK(std::abs(m.modes[0].Q) < 1e-8);
  CHECK(m.modes[0].dQ * m.modes[0].dQ == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(m.modes[0].dQ * m.modes[0].dP == doctest::Approx(0.5).epsilon(1e-7));

  const auto disp = gaussian_packet(single_mode(2.0, -1.0, d, d, 1.0), g);
  const auto md = moments_of_state(projector(disp), 1.0);
  CHECK(md.modes[0].Q == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(md.modes[0].P == doctest::Approx(-1.0).epsilon(1e-6));

  CHECK_THROWS_AS(gaussian_packet(single_mode(0.0, 0.0, 1.0, 1.0, 1.0), g),
                  Error);
}

TEST_CASE("near-minimal packet approaches the gaussian projector") {
  const auto g = build_grid(-10.0, 10.0, 256);
  const double eps = 1e-3;
  const double nu = 1.0 + eps;
  const double d = std::sqrt(nu / 2.0);

  const auto rho = me_packet(single_mode(0.0, 0.0, d, d, 1.0), Basis(g));
  const double dg = d / std::sqrt(nu);
  const auto psi = gaussian_packet(single_mode(0.0, 0.0, dg, dg, 1.0), g);

  CHECK(overlap_fidelity(psi, rho) > 0.999);
  CHECK(trace_distance(rho, projector(psi)) < 6e-3);
  // leading deviation is the weight of the first excited level
  CHECK(trace_distance(rho, projector(psi)) ==
        doctest::Approx(lambda_of_nu(nu)).epsilon(0.05));
}

TEST_CASE("moments of maximally mixed truncation are finite") {
  const Basis fb(FockBasis{2, 0, 0, 1.0, 1.0});
  const auto rho = make_state(fb, MatrixXC<double>::Identity(2, 2) / 2.0);
  const auto m = moments_of_state(rho, 1.0);
  CHECK(std::isfinite(m.modes[0].dQ));
  CHECK(m.modes[0].dQ > 0);
}

TEST_CASE("multi-mode packet is the product of single-mode packets") {
  Moments m;
  m.hbar = 1.0;
  m.modes = {ModeMoments{0.3, 0.0, std::sqrt(1.05 / 2), std::sqrt(1.05 / 2)},
             ModeMoments{-0.2, 0.4, std::sqrt(1.04 / 2), std::sqrt(1.04 / 2)},
             ModeMoments{0.0, -0.1, std::sqrt(1.03 / 2), std::sqrt(1.03 / 2)}};
  ProductBasis pb;
  for (const auto& mode : m.modes)
    pb.factors.push_back(matched_fock_basis(mode, 1.0, 8));

  const auto rho = me_packet(m, Basis(pb));

  MatrixXC<double> manual = MatrixXC<double>::Identity(1, 1);
  for (std::size_t k = 0; k < m.modes.size(); ++k) {
    const auto single = me_packet(single_mode(m.modes[k].Q, m.modes[k].P,
                                              m.modes[k].dQ, m.modes[k].dP, 1.0),
                                  Basis(pb.factors[k]));
    manual = kron_matrix(manual, single.mat);
  }
  CHECK((rho.mat - manual).cwiseAbs().maxCoeff() < 1e-12);

  double closed = 0;
  for (const auto& mode : m.modes)
    closed += me_entropy_closed_form(2 * mode.dP * mode.dQ / m.hbar);
  CHECK(von_neumann_entropy(rho) == doctest::Approx(closed).epsilon(1e-6));

  const auto mm = moments_of_state(rho, 1.0);
  for (std::size_t k = 0; k < m.modes.size(); ++k) {
    CHECK(mm.modes[k].Q == doctest::Approx(m.modes[k].Q).epsilon(1e-6));
    CHECK(mm.modes[k].dQ == doctest::Approx(m.modes[k].dQ).epsilon(1e-6));
  }
}
