#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mep/mepacket.hpp"
#include "mep/rng.hpp"

namespace mep {

enum class PotentialKind { free_particle, harmonic, quartic, double_well, polynomial };

// V(q) = sum_k coeffs[k] q^k, degree <= 8
template <class S>
struct PotentialSpecT {
  PotentialKind kind{PotentialKind::free_particle};
  S mass{1};
  std::vector<S> coeffs;
};

namespace detail {

template <class S>
void validate_potential(const PotentialSpecT<S>& v) {
  if (!(v.mass > 0))
    throw Error(Errc::domain_violation, "mass must be positive");
  if (v.coeffs.size() > 9)
    throw Error(Errc::domain_violation, "potential degree exceeds 8");
  for (const S c : v.coeffs)
    if (!std::isfinite(c))
      throw Error(Errc::domain_violation, "potential coefficient not finite");
  if (v.kind == PotentialKind::free_particle) return;
  int lead = -1;
  for (int k = 0; k < static_cast<int>(v.coeffs.size()); ++k)
    if (v.coeffs[k] != 0) lead = k;
  if (lead < 2 || lead % 2 != 0 || !(v.coeffs[lead] > 0))
    throw Error(Errc::domain_violation,
                "potential is not confining: leading even coefficient must be positive");
}

}  // namespace detail

template <class S>
PotentialSpecT<S> free_potential(S mass = 1) {
  PotentialSpecT<S> v{PotentialKind::free_particle, mass, {}};
  detail::validate_potential(v);
  return v;
}

template <class S>
PotentialSpecT<S> harmonic_potential(S omega, S mass = 1) {
  PotentialSpecT<S> v{PotentialKind::harmonic, mass,
                      {0, 0, mass * omega * omega / 2}};
  detail::validate_potential(v);
  return v;
}

template <class S>
PotentialSpecT<S> quartic_potential(S lambda4, S mass = 1) {
  PotentialSpecT<S> v{PotentialKind::quartic, mass, {0, 0, 0, 0, lambda4}};
  detail::validate_potential(v);
  return v;
}

// a (q^2 - b)^2
template <class S>
PotentialSpecT<S> double_well_potential(S a, S b, S mass = 1) {
  PotentialSpecT<S> v{PotentialKind::double_well, mass,
                      {a * b * b, 0, -2 * a * b, 0, a}};
  detail::validate_potential(v);
  return v;
}

template <class S>
PotentialSpecT<S> polynomial_potential(std::vector<S> coeffs, S mass = 1) {
  PotentialSpecT<S> v{PotentialKind::polynomial, mass, std::move(coeffs)};
  detail::validate_potential(v);
  return v;
}

template <class S>
S potential_value(const PotentialSpecT<S>& v, S q) {
  S acc = 0;
  for (std::size_t k = v.coeffs.size(); k-- > 0;) acc = acc * q + v.coeffs[k];
  return acc;
}

template <class S>
S potential_force(const PotentialSpecT<S>& v, S q) {
  S acc = 0;
  for (std::size_t k = v.coeffs.size(); k-- > 1;)
    acc = acc * q + S(k) * v.coeffs[k];
  return -acc;
}

enum class EngineTag { quantum, classical };

template <class S>
struct TrajectoryRecordT {
  std::vector<S> times;
  std::vector<ModeMomentsT<S>> moments;
  std::vector<ModeMomentsT<S>> std_errors;  // Monte Carlo; zero for quantum
  EngineTag engine{EngineTag::quantum};
  int dim{0};
  long n_samples{0};
  std::uint64_t seed{0};
  S hbar{0};
};

template <class S>
struct EnsembleT {
  std::vector<std::array<S, 2>> samples;  // (q, p)
  std::uint64_t seed{0};
};

namespace detail {

template <class S>
void validate_times(const std::vector<S>& t) {
  if (t.empty())
    throw Error(Errc::domain_violation, "empty time grid");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i]))
      throw Error(Errc::domain_violation, "time grid entry not finite");
    if (i > 0 && !(t[i] > t[i - 1]))
      throw Error(Errc::domain_violation, "time grid must strictly increase");
  }
}

}  // namespace detail

template <class S>
std::vector<S> uniform_times(S t_end, int n_records) {
  if (!(t_end > 0) || n_records < 2)
    throw Error(Errc::domain_violation, "need t_end > 0 and >= 2 records");
  std::vector<S> t(n_records);
  for (int i = 0; i < n_records; ++i) t[i] = t_end * S(i) / S(n_records - 1);
  return t;
}

// p^2/2m + V(q); the grid must resolve a fifth of the shortest de Broglie
// wavelength reachable at the potential's energy scale
template <class S>
OperatorT<S> build_hamiltonian(const GridBasisT<S>& b,
                               const PotentialSpecT<S>& v, S hbar) {
  detail::validate_potential(v);
  if (!(hbar > 0))
    throw Error(Errc::domain_violation, "hbar must be positive");

  const VectorX<S> x = b.points();
  S vmin = potential_value(v, x[0]);
  S vmax = vmin;
  for (int j = 1; j < b.n_points; ++j) {
    const S val = potential_value(v, x[j]);
    vmin = std::min(vmin, val);
    vmax = std::max(vmax, val);
  }
  const S p_max = std::sqrt(2 * v.mass * (vmax - vmin));
  if (p_max > 0) {
    const S de_broglie = 2 * std::numbers::pi_v<S> * hbar / p_max;
    if (!(b.spacing() < S(0.2) * de_broglie))
      throw Error(Errc::resolution_insufficient,
                  "grid spacing exceeds a fifth of the de Broglie wavelength");
  }

  MatrixXC<S> h = momentum_squared_operator(b, hbar).mat / (2 * v.mass);
  for (int j = 0; j < b.n_points; ++j) h(j, j) += potential_value(v, x[j]);
  return OperatorT<S>{BasisT<S>(b), hermitize(h), true};
}

namespace detail {

template <class S>
struct SpectralPropagatorT {
  BasisT<S> basis;
  S hbar;
  VectorX<S> energies;
  MatrixXC<S> vectors;
  MatrixXC<S> rho0_eig;  // V^dag rho0 V
};

template <class S>
SpectralPropagatorT<S> spectral_propagator(const StateOperatorT<S>& rho0,
                                           const OperatorT<S>& h, S hbar) {
  if (!(rho0.basis == h.basis))
    throw Error(Errc::basis_mismatch, "state and Hamiltonian bases differ");
  if (!(hbar > 0))
    throw Error(Errc::domain_violation, "hbar must be positive");
  auto eig = hermitian_eig(h);
  MatrixXC<S> rho0_eig = eig.vectors.adjoint() * rho0.mat * eig.vectors;
  return SpectralPropagatorT<S>{rho0.basis, hbar, std::move(eig.values),
                                std::move(eig.vectors), std::move(rho0_eig)};
}

template <class S>
MatrixXC<S> propagated_eigbasis(const SpectralPropagatorT<S>& sp, S t) {
  const int n = sp.energies.size();
  VectorXC<S> phase(n);
  for (int j = 0; j < n; ++j) {
    const S arg = -sp.energies[j] * t / sp.hbar;
    phase[j] = std::complex<S>(std::cos(arg), std::sin(arg));
  }
  return (phase * phase.adjoint()).cwiseProduct(sp.rho0_eig);
}

}  // namespace detail

template <class S>
TrajectoryRecordT<S> evolve_quantum(const StateOperatorT<S>& rho0,
                                    const OperatorT<S>& h,
                                    const std::vector<S>& t_grid, S hbar) {
  detail::validate_times(t_grid);
  const auto sp = detail::spectral_propagator(rho0, h, hbar);
  const auto ops = detail::quad_ops(rho0.basis, hbar);
  const MatrixXC<S> qe = sp.vectors.adjoint() * ops.q.mat * sp.vectors;
  const MatrixXC<S> pe = sp.vectors.adjoint() * ops.p.mat * sp.vectors;
  const MatrixXC<S> q2e = sp.vectors.adjoint() * ops.q2.mat * sp.vectors;
  const MatrixXC<S> p2e = sp.vectors.adjoint() * ops.p2.mat * sp.vectors;

  TrajectoryRecordT<S> rec;
  rec.times = t_grid;
  rec.engine = EngineTag::quantum;
  rec.dim = dim_of(rho0.basis);
  rec.hbar = hbar;
  rec.moments.reserve(t_grid.size());
  rec.std_errors.assign(t_grid.size(), ModeMomentsT<S>{0, 0, 0, 0});

  for (const S t : t_grid) {
    const MatrixXC<S> rt = detail::propagated_eigbasis(sp, t);
    const auto mean = [&rt](const MatrixXC<S>& a) {
      return (rt.array() * a.transpose().array()).sum().real();
    };
    const S mq = mean(qe);
    const S mp = mean(pe);
    const S vq = mean(q2e) - mq * mq;
    const S vp = mean(p2e) - mp * mp;
    if (!(vq > 0) || !(vp > 0))
      throw Error(Errc::internal_check, "propagated spreads must stay positive");
    rec.moments.push_back(
        ModeMomentsT<S>{mq, mp, std::sqrt(vq), std::sqrt(vp)});
  }
  return rec;
}

template <class S>
StateOperatorT<S> evolved_state(const StateOperatorT<S>& rho0,
                                const OperatorT<S>& h, S t, S hbar) {
  const auto sp = detail::spectral_propagator(rho0, h, hbar);
  const MatrixXC<S> rt = detail::propagated_eigbasis(sp, t);
  return make_state(rho0.basis,
                    (sp.vectors * rt * sp.vectors.adjoint()).eval());
}

template <class S>
EnsembleT<S> sample_ensemble(const MomentsT<S>& m, long n, std::uint64_t seed) {
  if (m.modes.size() != 1)
    throw Error(Errc::domain_violation, "ensemble sampling is single-mode");
  if (n < 2)
    throw Error(Errc::domain_violation, "need at least 2 samples");
  const auto& mm = m.modes[0];
  if (!(mm.dQ > 0) || !(mm.dP > 0))
    throw Error(Errc::domain_violation, "spreads must be positive");

  EnsembleT<S> e;
  e.seed = seed;
  e.samples.resize(n);
  for (long i = 0; i < n; ++i) {
    const auto [z1, z2] = normal_pair(seed, static_cast<std::uint64_t>(i));
    e.samples[i] = {mm.Q + mm.dQ * S(z1), mm.P + mm.dP * S(z2)};
  }
  return e;
}

namespace detail {

template <class S>
struct SampleStatsT {
  ModeMomentsT<S> moments;
  ModeMomentsT<S> std_errors;
};

template <class S>
SampleStatsT<S> ensemble_stats(const std::vector<std::array<S, 2>>& s) {
  const long n = static_cast<long>(s.size());
  long double sq = 0, sp = 0;
  for (const auto& qp : s) {
    if (!std::isfinite(qp[0]) || !std::isfinite(qp[1]))
      throw Error(Errc::non_finite, "classical trajectory diverged");
    sq += qp[0];
    sp += qp[1];
  }
  const long double mq = sq / n;
  const long double mp = sp / n;
  long double v2q = 0, v2p = 0, v4q = 0, v4p = 0;
  for (const auto& qp : s) {
    const long double dq = qp[0] - mq;
    const long double dp = qp[1] - mp;
    v2q += dq * dq;
    v2p += dp * dp;
    v4q += dq * dq * dq * dq;
    v4p += dp * dp * dp * dp;
  }
  v2q /= n;
  v2p /= n;
  v4q /= n;
  v4p /= n;
  const long double sdq = std::sqrt(v2q);
  const long double sdp = std::sqrt(v2p);

  SampleStatsT<S> out;
  out.moments = ModeMomentsT<S>{S(mq), S(mp), S(sdq), S(sdp)};
  const long double rn = std::sqrt(static_cast<long double>(n));
  const auto spread_se = [&](long double v4, long double v2,
                             long double sd) -> S {
    const long double var_of_var = std::max(v4 - v2 * v2, 0.0L);
    return S(std::sqrt(var_of_var) / (2 * sd * rn));
  };
  out.std_errors = ModeMomentsT<S>{S(sdq / rn), S(sdp / rn),
                                   spread_se(v4q, v2q, sdq),
                                   spread_se(v4p, v2p, sdp)};
  return out;
}

}  // namespace detail

namespace detail {

// velocity-Verlet over one span, one force evaluation per step
template <class S>
void integrate_segment(std::vector<std::array<S, 2>>& qp,
                       const PotentialSpecT<S>& v, S span, S dt) {
  const long n_steps =
      std::max<long>(1, std::lround(static_cast<double>(span / dt)));
  const S h = span / S(n_steps);
  const S inv_m = 1 / v.mass;
  for (auto& s : qp) {
    S q = s[0];
    S p = s[1];
    S f = potential_force(v, q);
    for (long k = 0; k < n_steps; ++k) {
      const S ph = p + (h / 2) * f;
      q += h * ph * inv_m;
      f = potential_force(v, q);
      p = ph + (h / 2) * f;
    }
    s = {q, p};
  }
}

}  // namespace detail

template <class S>
EnsembleT<S> propagate_samples(const EnsembleT<S>& e,
                               const PotentialSpecT<S>& v, S t, S dt) {
  detail::validate_potential(v);
  if (!(dt > 0) || !(t >= 0))
    throw Error(Errc::domain_violation, "need t >= 0 and dt > 0");
  EnsembleT<S> out = e;
  if (t > 0) detail::integrate_segment(out.samples, v, t, dt);
  return out;
}

template <class S>
TrajectoryRecordT<S> evolve_classical(const EnsembleT<S>& e,
                                      const PotentialSpecT<S>& v,
                                      const std::vector<S>& t_grid, S dt) {
  detail::validate_potential(v);
  detail::validate_times(t_grid);
  if (!(dt > 0))
    throw Error(Errc::domain_violation, "dt must be positive");
  if (t_grid.front() < 0)
    throw Error(Errc::domain_violation, "classical records start at t >= 0");
  if (e.samples.size() < 2)
    throw Error(Errc::domain_violation, "need at least 2 samples");

  auto qp = e.samples;

  TrajectoryRecordT<S> rec;
  rec.times = t_grid;
  rec.engine = EngineTag::classical;
  rec.n_samples = static_cast<long>(qp.size());
  rec.seed = e.seed;

  S t_cur = 0;
  for (const S t_next : t_grid) {
    const S span = t_next - t_cur;
    if (span > 0) {
      detail::integrate_segment(qp, v, span, dt);
      t_cur = t_next;
    }
    const auto stats = detail::ensemble_stats(qp);
    rec.moments.push_back(stats.moments);
    rec.std_errors.push_back(stats.std_errors);
  }
  return rec;
}

template <class S>
struct DiscrepancyReportT {
  std::vector<S> diff_q, diff_p, diff_dq, diff_dp;  // per recorded time
  S max_q{}, max_p{}, max_dq{}, max_dp{};
  S aggregate{};  // max over quantities, scaled by the initial spreads
};

template <class S>
DiscrepancyReportT<S> compare_trajectories(const TrajectoryRecordT<S>& a,
                                           const TrajectoryRecordT<S>& b) {
  if (a.times.size() != b.times.size())
    throw Error(Errc::grid_mismatch, "records use different time grids");
  for (std::size_t i = 0; i < a.times.size(); ++i)
    if (a.times[i] != b.times[i])
      throw Error(Errc::grid_mismatch, "records use different time grids");

  DiscrepancyReportT<S> r;
  const std::size_t n = a.times.size();
  r.diff_q.resize(n);
  r.diff_p.resize(n);
  r.diff_dq.resize(n);
  r.diff_dp.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.diff_q[i] = std::abs(a.moments[i].Q - b.moments[i].Q);
    r.diff_p[i] = std::abs(a.moments[i].P - b.moments[i].P);
    r.diff_dq[i] = std::abs(a.moments[i].dQ - b.moments[i].dQ);
    r.diff_dp[i] = std::abs(a.moments[i].dP - b.moments[i].dP);
    r.max_q = std::max(r.max_q, r.diff_q[i]);
    r.max_p = std::max(r.max_p, r.diff_p[i]);
    r.max_dq = std::max(r.max_dq, r.diff_dq[i]);
    r.max_dp = std::max(r.max_dp, r.diff_dp[i]);
  }
  const S sq = a.moments[0].dQ;
  const S sp = a.moments[0].dP;
  r.aggregate = std::max(std::max(r.max_q / sq, r.max_dq / sq),
                         std::max(r.max_p / sp, r.max_dp / sp));
  return r;
}

enum class SweepMode { shrink_hbar, grow_spreads };

template <class S>
struct SweepRowT {
  S level{}, hbar{}, nu{};
  S max_q{}, max_p{}, max_dq{}, max_dp{};
  S aggregate{};
};

template <class S>
struct SweepTableT {
  SweepMode mode{};
  std::vector<SweepRowT<S>> rows;
  S fitted_order{};
  S order_stderr{};
};

// mode shrink_hbar: levels are hbar values at fixed template spreads
// mode grow_spreads: levels multiply the template spreads at fixed hbar
template <class S>
SweepTableT<S> hbar_sweep(const GridBasisT<S>& grid, const PotentialSpecT<S>& v,
                          const MomentsT<S>& m, const std::vector<S>& levels,
                          SweepMode mode, S t_end, S dt, long n_samples,
                          std::uint64_t seed, int n_records = 31) {
  if (m.modes.size() != 1)
    throw Error(Errc::domain_violation, "sweep template is single-mode");
  if (levels.empty())
    throw Error(Errc::domain_violation, "sweep needs at least one level");
  const auto t_grid = uniform_times(t_end, n_records);

  SweepTableT<S> table;
  table.mode = mode;

  TrajectoryRecordT<S> classical;  // reused when moments do not change
  bool have_classical = false;

  for (const S level : levels) {
    MomentsT<S> mk = m;
    if (mode == SweepMode::shrink_hbar) {
      mk.hbar = level;
    } else {
      mk.modes[0].dQ *= level;
      mk.modes[0].dP *= level;
    }
    const auto& mm = mk.modes[0];
    const S nu = nu_from_moments(mm.dQ, mm.dP, mk.hbar);

    const auto rho0 = me_packet(mk, BasisT<S>(grid));
    const auto h = build_hamiltonian(grid, v, mk.hbar);
    const auto quantum = evolve_quantum(rho0, h, t_grid, mk.hbar);

    if (!have_classical || mode == SweepMode::grow_spreads) {
      classical = evolve_classical(sample_ensemble(mk, n_samples, seed), v,
                                   t_grid, dt);
      have_classical = true;
    }
    const auto rep = compare_trajectories(quantum, classical);

    SweepRowT<S> row;
    row.level = level;
    row.hbar = mk.hbar;
    row.nu = nu;
    row.max_q = rep.max_q;
    row.max_p = rep.max_p;
    row.max_dq = rep.max_dq;
    row.max_dp = rep.max_dp;
    row.aggregate = rep.aggregate;
    table.rows.push_back(row);
  }

  // convergence order from ln(aggregate) against ln(1/nu); both sweep modes
  // drive nu -> infinity, so one regressor covers them
  const int n = static_cast<int>(table.rows.size());
  if (n >= 2) {
    S sx = 0, sy = 0;
    std::vector<S> xs(n), ys(n);
    for (int i = 0; i < n; ++i) {
      xs[i] = -std::log(table.rows[i].nu);
      ys[i] = std::log(std::max(table.rows[i].aggregate, S(1e-300)));
      sx += xs[i];
      sy += ys[i];
    }
    const S mx = sx / n;
    const S my = sy / n;
    S sxx = 0, sxy = 0, sse = 0;
    for (int i = 0; i < n; ++i) {
      sxx += (xs[i] - mx) * (xs[i] - mx);
      sxy += (xs[i] - mx) * (ys[i] - my);
    }
    table.fitted_order = sxy / sxx;
    for (int i = 0; i < n; ++i) {
      const S r = ys[i] - my - table.fitted_order * (xs[i] - mx);
      sse += r * r;
    }
    table.order_stderr =
        n > 2 ? std::sqrt(sse / S(n - 2) / sxx) : S(0);
  }
  return table;
}

using PotentialSpec = PotentialSpecT<double>;
using TrajectoryRecord = TrajectoryRecordT<double>;
using Ensemble = EnsembleT<double>;
using DiscrepancyReport = DiscrepancyReportT<double>;
using SweepRow = SweepRowT<double>;
using SweepTable = SweepTableT<double>;

}  // namespace mep
