#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "mep/identicals.hpp"

using namespace mep;
using doctest::Approx;

namespace {

GridBasisT<double> wide_grid() { return build_grid(-16.0, 24.0, 512); }

WaveFunctionT<double> masked_random(const GridBasisT<double>& g,
                                    double lo, double hi, unsigned seed) {
  VectorXC<double> v = testing::random_complex_vector(g.n_points, seed);
  const VectorX<double> x = g.points();
  for (int j = 0; j < g.n_points; ++j)
    if (!(lo < x[j] && x[j] < hi)) v[j] = 0;
  return make_wavefunction(BasisT<double>(g), std::move(v));
}

}  // namespace

TEST_CASE("single-particle averages on multiplication kernels") {
  const auto g = wide_grid();
  const auto psi = testing::gaussian_wf(g, 0.0, 0.0, 1.0, 1.0);

  CHECK(std::abs(single_average(psi, position_kernel(g))) < 1e-9);
  const auto q2 = multiplication_kernel(g, [](double x) { return x * x; });
  CHECK(single_average(psi, q2) == Approx(1.0).epsilon(1e-7));
  CHECK(single_average(psi, identity_kernel(g)) == Approx(1.0).epsilon(1e-10));
}

TEST_CASE("pair normalization covers the orthogonal and identical cases") {
  const auto g = wide_grid();
  const auto psi = testing::gaussian_wf(g, 0.0, 0.0, 0.5, 1.0);
  const auto phi = testing::gaussian_wf(g, 8.0, 0.0, 0.5, 1.0);

  const auto pair = symmetrize(psi, phi, +1);
  CHECK(std::abs(pair.overlap) < 1e-12);
  CHECK(pair.norm_factor == Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));

  const auto same = symmetrize(psi, psi, +1);
  CHECK(same.norm_factor == Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_WITH_AS(symmetrize(psi, psi, -1),
                       doctest::Contains("PauliExclusion"), Error);
}

TEST_CASE("identical bosonic pair behaves as the plain product state") {
  const auto g = build_grid(-6.0, 6.0, 16);
  const auto psi = make_wavefunction(
      BasisT<double>(g), testing::random_complex_vector(16, 71u));
  // additive observables double, and the brute-force route agrees
  const auto id = identity_kernel(g);
  CHECK(brute_force_pair_average(psi, psi, +1, id) == Approx(2.0).epsilon(1e-12));
  const auto pair = symmetrize(psi, psi, +1);
  CHECK(symmetrized_observable_average(pair, id) == Approx(2.0).epsilon(1e-12));
}

TEST_CASE("structured averages match the materialized tensor oracle") {
  const auto g = build_grid(-3.0, 3.0, 16);
  for (unsigned seed = 0; seed < 12; ++seed) {
    const auto psi = make_wavefunction(
        BasisT<double>(g), testing::random_complex_vector(16, 100 + seed));
    const auto phi = make_wavefunction(
        BasisT<double>(g), testing::random_complex_vector(16, 200 + seed));
    const auto a = make_kernel(g, testing::random_hermitian(16, 300 + seed));
    for (const int sign : {+1, -1}) {
      const auto pair = symmetrize(psi, phi, sign);
      const double fast = symmetrized_observable_average(pair, a);
      const double slow = brute_force_pair_average(psi, phi, sign, a);
      CHECK(fast == Approx(slow).epsilon(1e-10));
    }
  }
}

TEST_CASE("orthogonal pairs reduce to the sum of single averages") {
  const auto g = build_grid(-3.0, 3.0, 16);
  const auto psi = masked_random(g, -3.0, 0.0, 11u);
  const auto phi = masked_random(g, 0.0, 3.0, 12u);
  CHECK(std::abs(grid_overlap(psi, phi)) == 0.0);

  const auto a = make_kernel(g, testing::random_hermitian(16, 13u));
  const double sum = single_average(psi, a) + single_average(phi, a);
  for (const int sign : {+1, -1}) {
    const auto pair = symmetrize(psi, phi, sign);
    CHECK(symmetrized_observable_average(pair, a) == Approx(sum).epsilon(1e-10));
  }
  // with zero overlap the exchange term is gone, so the sign cannot matter
  const double plus =
      symmetrized_observable_average(symmetrize(psi, phi, +1), a);
  const double minus =
      symmetrized_observable_average(symmetrize(psi, phi, -1), a);
  CHECK(plus == Approx(minus).epsilon(1e-12));
}

TEST_CASE("exchange symmetry of the pair average") {
  const auto g = build_grid(-3.0, 3.0, 16);
  const auto psi = make_wavefunction(
      BasisT<double>(g), testing::random_complex_vector(16, 21u));
  const auto phi = make_wavefunction(
      BasisT<double>(g), testing::random_complex_vector(16, 22u));
  const auto a = make_kernel(g, testing::random_hermitian(16, 23u));
  for (const int sign : {+1, -1}) {
    const double ab =
        symmetrized_observable_average(symmetrize(psi, phi, sign), a);
    const double ba =
        symmetrized_observable_average(symmetrize(phi, psi, sign), a);
    CHECK(ab == Approx(ba).epsilon(1e-12));
  }
}

TEST_CASE("remote companion shifts the registered position by its distance") {
  const auto g = wide_grid();
  const auto psi = testing::gaussian_wf(g, 0.0, 0.0, 0.5, 1.0);
  const auto phi = testing::gaussian_wf(g, 8.0, 0.0, 0.5, 1.0);
  const auto q = position_kernel(g);

  CHECK(std::abs(single_average(psi, q)) < 1e-9);
  const auto pair = symmetrize(psi, phi, +1);
  CHECK(symmetrized_observable_average(pair, q) == Approx(8.0).epsilon(1e-7));
  for (const int sign : {+1, -1})
    CHECK(disturbance(psi, phi, sign, q) == Approx(8.0).epsilon(1e-7));

  // the identical remote particle adds exactly one unit of "number"
  CHECK(disturbance(psi, psi, +1, identity_kernel(g)) ==
        Approx(1.0).epsilon(1e-12));
}

TEST_CASE("restriction produces local observables and kills the disturbance") {
  const auto g = wide_grid();
  const auto d = make_region<double>({{-4.0, 4.0}});
  const auto q = position_kernel(g);

  CHECK_FALSE(is_d_local(q, d, 1e-12));
  const auto qd = restrict_to_region(q, d);
  CHECK(is_d_local(qd, d, 1e-12));
  CHECK(is_d_local(KernelOperatorT<double>{g, MatrixXC<double>::Zero(512, 512)},
                   d, 1e-12));

  const auto psi = testing::gaussian_wf(g, 0.0, 0.0, 0.5, 1.0);
  const auto phi = testing::gaussian_wf(g, 8.0, 0.0, 0.5, 1.0);
  CHECK(region_mass(phi, d) < 1e-14);
  for (const int sign : {+1, -1})
    CHECK(disturbance(psi, phi, sign, qd) < 1e-10);
  // the same holds for every probe in the default D-local family
  for (const auto& probe : default_probes(g, d))
    for (const int sign : {+1, -1})
      CHECK(disturbance(psi, phi, sign, probe) < 1e-10);
}

TEST_CASE("region restriction is idempotent and respects open boundaries") {
  const auto g = build_grid(-4.0, 4.0, 32);
  const auto d = make_region<double>({{-1.0, 1.0}});
  const auto a = make_kernel(g, testing::random_hermitian(32, 31u));

  const auto once = restrict_to_region(a, d);
  const auto twice = restrict_to_region(once, d);
  CHECK((once.kernel - twice.kernel).cwiseAbs().maxCoeff() == 0.0);

  // restricting to the full open interval only clears the two endpoints
  const auto full = make_region<double>({{-4.0, 4.0}});
  const auto af = restrict_to_region(a, full);
  CHECK((af.kernel.block(1, 1, 30, 30) - a.kernel.block(1, 1, 30, 30))
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK(af.kernel.row(0).norm() == 0.0);
  CHECK(af.kernel.col(31).norm() == 0.0);

  // restricted identity acts as the identity on states living inside D
  const auto idd = restrict_to_region(identity_kernel(g), d);
  const auto psi = masked_random(g, -1.0, 1.0, 32u);
  const VectorXC<double> out = g.weight() * (idd.kernel * psi.amps);
  CHECK((out - psi.amps).norm() < 1e-12);
}

TEST_CASE("region boundaries are exclusive and intervals must be ordered") {
  const auto d = make_region<double>({{-1.0, 1.0}, {2.0, 3.0}});
  CHECK(region_contains(d, 0.0));
  CHECK(region_contains(d, 2.5));
  CHECK_FALSE(region_contains(d, 1.0));
  CHECK_FALSE(region_contains(d, 2.0));
  CHECK_FALSE(region_contains(d, 1.5));

  CHECK_THROWS_WITH_AS((make_region<double>({{1.0, 1.0}})),
                       doctest::Contains("DomainViolation"), Error);
  CHECK_THROWS_WITH_AS((make_region<double>({{0.0, 2.0}, {1.0, 3.0}})),
                       doctest::Contains("DomainViolation"), Error);
}

TEST_CASE("separation status report") {
  const auto g = wide_grid();
  const auto d = make_region<double>({{-4.0, 4.0}});
  const auto psi = testing::gaussian_wf(g, 0.0, 0.0, 0.5, 1.0);
  const auto far = testing::gaussian_wf(g, 8.0, 0.0, 0.5, 1.0);

  SeparationCriteriaT<double> crit{1e-6, 1e-6, default_probes(g, d)};
  const auto ok = separation_status_check(psi, {far}, d, crit);
  CHECK(ok.pass);
  // one support check, one mass check, three probes x two signs
  CHECK(ok.checks.size() == 8);
  for (const auto& c : ok.checks) CHECK(c.pass);

  // a companion sitting inside D carries far too much probability there
  const auto near = testing::gaussian_wf(g, 3.0, 0.0, 1.0, 1.0);
  const auto bad = separation_status_check(psi, {near}, d, crit);
  CHECK_FALSE(bad.pass);
  CHECK(bad.checks[1].value == Approx(0.8413).epsilon(1e-3));
  CHECK_FALSE(bad.checks[1].pass);

  // psi with no support in D fails the first check outright
  const auto outside = masked_random(g, 6.0, 20.0, 41u);
  const auto miss = separation_status_check(outside, {far}, d, crit);
  CHECK_FALSE(miss.pass);
  CHECK_FALSE(miss.checks[0].pass);

  SeparationCriteriaT<double> leaky{1e-6, 1e-6, {position_kernel(g)}};
  CHECK_THROWS_WITH_AS(separation_status_check(psi, {far}, d, leaky),
                       doctest::Contains("ProbeNotLocal"), Error);
  SeparationCriteriaT<double> zero{0.0, 1e-6, default_probes(g, d)};
  CHECK_THROWS_WITH_AS(separation_status_check(psi, {far}, d, zero),
                       doctest::Contains("DomainViolation"), Error);
}

TEST_CASE("kernel and size guards") {
  const auto g = build_grid(-4.0, 4.0, 64);
  MatrixXC<double> m = MatrixXC<double>::Zero(64, 64);
  m(0, 1) = {0.0, 1.0};
  CHECK_THROWS_WITH_AS(make_kernel(g, m), doctest::Contains("NotHermitian"),
                       Error);

  const auto psi = make_wavefunction(
      BasisT<double>(g), testing::random_complex_vector(64, 51u));
  CHECK_THROWS_WITH_AS(
      brute_force_pair_average(psi, psi, +1, identity_kernel(g)),
      doctest::Contains("GridTooLarge"), Error);
}
