#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include "tdbh/errors.hpp"
#include "tdbh/fock.hpp"
#include "tdbh/matrix_elements.hpp"
#include "tdbh/ode.hpp"
#include "tdbh/trajectory.hpp"

namespace tdbh {

/// Unique nearest-neighbor bonds of the ring: one bond for M = 2 (so the
/// two-level splitting is 2J and t_Rabi = pi / J), M bonds for M >= 3.
inline std::vector<std::pair<int, int>> ring_bonds(int m_sites) {
  std::vector<std::pair<int, int>> bonds;
  if (m_sites == 2) {
    bonds.emplace_back(0, 1);
  } else {
    for (int k = 0; k < m_sites; ++k) bonds.emplace_back(k, (k + 1) % m_sites);
  }
  return bonds;
}

/// Static single-band Bose-Hubbard parameters.
struct BHParams {
  double j_hop = 0.0;           // J > 0 for the ground band of this potential
  std::vector<double> eps;      // per site
  std::vector<double> u_int;    // per site
  std::vector<std::pair<int, int>> bonds;
};

/// Instantaneous (possibly complex-J) Hamiltonian parameters; the TDBH model
/// evaluates these from the band amplitudes at each time.
struct BondParams {
  std::vector<std::complex<double>> j_bond;  // per bond, order of `bonds`
  std::vector<double> eps;
  std::vector<double> u;
  std::vector<std::pair<int, int>> bonds;
};

inline BondParams to_bond_params(const BHParams& p) {
  BondParams bp;
  bp.bonds = p.bonds;
  bp.j_bond.assign(p.bonds.size(), std::complex<double>(p.j_hop, 0.0));
  bp.eps = p.eps;
  bp.u = p.u_int;
  return bp;
}

/// Extracts J, eps, U of the given band from the static matrix elements.
inline BHParams bh_params(const MatrixElements& me, int band = 0) {
  BHParams p;
  p.bonds = ring_bonds(me.m_sites);
  const std::complex<double> hop = me.hop_band(0, 1, band);
  p.j_hop = -hop.real();  // gauge makes this real; J > 0 for the ground band
  for (int k = 0; k < me.m_sites; ++k) {
    p.eps.push_back(me.eps_band(k, band));
    const int nu = me.n_bands;
    p.u_int.push_back(
        me.u_onsite[k][((band * nu + band) * nu + band) * nu + band].real());
  }
  return p;
}

/// out = H C with H = sum_bonds(-J b^dag b - J* h.c.) + sum_k eps n_k
///                 + sum_k (U_k/2) n_k (n_k - 1).
inline void hamiltonian_action(const BondParams& p, const FockBasis& basis,
                               const Eigen::VectorXcd& in,
                               Eigen::VectorXcd& out) {
  const int m = basis.n_modes();
  out.setZero();
  std::vector<int> tmp(m);
  for (std::uint64_t r = 0; r < basis.size(); ++r) {
    const std::complex<double> cr = in[r];
    const auto cfg = basis.config(r);
    double diag = 0.0;
    for (int k = 0; k < m; ++k)
      diag += p.eps[k] * cfg[k] + 0.5 * p.u[k] * cfg[k] * (cfg[k] - 1.0);
    out[r] += diag * cr;
    if (cr == std::complex<double>(0.0, 0.0)) continue;
    for (std::size_t b = 0; b < p.bonds.size(); ++b) {
      const auto [k, q] = p.bonds[b];
      // -J b_k^dag b_q
      if (cfg[q] > 0) {
        std::copy(cfg.begin(), cfg.end(), tmp.begin());
        const double amp = std::sqrt(double(tmp[q]) * (tmp[k] + 1));
        --tmp[q];
        ++tmp[k];
        out[basis.rank(tmp)] += -p.j_bond[b] * amp * cr;
      }
      // -J* b_q^dag b_k
      if (cfg[k] > 0) {
        std::copy(cfg.begin(), cfg.end(), tmp.begin());
        const double amp = std::sqrt(double(tmp[k]) * (tmp[q] + 1));
        --tmp[k];
        ++tmp[q];
        out[basis.rank(tmp)] += -std::conj(p.j_bond[b]) * amp * cr;
      }
    }
  }
}

inline Eigen::VectorXcd hamiltonian_action(const BHParams& p,
                                           const FockBasis& basis,
                                           const Eigen::VectorXcd& in) {
  Eigen::VectorXcd out(in.size());
  hamiltonian_action(to_bond_params(p), basis, in, out);
  return out;
}

/// Fixes the global phase: the largest-magnitude entry becomes real positive.
inline void fix_phase(Eigen::VectorXcd& c) {
  long imax = 0;
  double amax = -1.0;
  for (long i = 0; i < c.size(); ++i)
    if (std::abs(c[i]) > amax) {
      amax = std::abs(c[i]);
      imax = i;
    }
  if (amax > 0) c *= std::abs(c[imax]) / c[imax];
}

/// Dense ground state (the Fock dimensions in scope are small).
inline std::pair<double, Eigen::VectorXcd> ground_state(
    const BHParams& p, const FockBasis& basis) {
  const auto dim = basis.size();
  if (dim > 8192)
    throw DimensionError("dense ground state limited to dim <= 8192");
  const BondParams bp = to_bond_params(p);
  Eigen::MatrixXcd h(dim, dim);
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(dim), col(dim);
  for (std::uint64_t j = 0; j < dim; ++j) {
    e[j] = 1.0;
    hamiltonian_action(bp, basis, e, col);
    h.col(j) = col;
    e[j] = 0.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
  if (solver.info() != Eigen::Success)
    throw NumericalError("ground-state eigensolver failed");
  Eigen::VectorXcd c = solver.eigenvectors().col(0);
  c.normalize();
  fix_phase(c);
  return {solver.eigenvalues()[0], c};
}

/// Noninteracting (U = 0) two-site ground state: the binomial condensate.
inline Eigen::VectorXcd binomial_condensate(const FockBasis& basis) {
  if (basis.n_modes() != 2)
    throw ConfigError("binomial_condensate requires M = 2");
  const int n = basis.n_particles();
  Eigen::VectorXcd c(basis.size());
  // C_i = sqrt(C(N, n_L)) / 2^(N/2), computed in logs for large N
  for (std::uint64_t r = 0; r < basis.size(); ++r) {
    const auto cfg = basis.config(r);
    double lg = 0.0;
    for (int m = 1; m <= n; ++m) lg += std::log(m);
    for (int m = 1; m <= cfg[0]; ++m) lg -= std::log(m);
    for (int m = 1; m <= cfg[1]; ++m) lg -= std::log(m);
    c[r] = std::exp(0.5 * lg - 0.5 * n * std::log(2.0));
  }
  c.normalize();
  return c;
}

/// Propagates i dC/dt = H C with the adaptive embedded Runge-Kutta pair;
/// integration runs in the gauge H - E0 with E0 = <C0|H|C0> (recorded),
/// samples are stored in the true gauge.
inline Trajectory propagate_bh(const Eigen::VectorXcd& c0, const BHParams& p,
                               const FockBasis& basis, double t_final,
                               double sample_dt, const OdeOptions& opts = {}) {
  if (std::abs(c0.norm() - 1.0) > 1e-8)
    throw ConfigError("propagate_bh: initial state not normalized");
  const BondParams bp = to_bond_params(p);
  Eigen::VectorXcd hc(c0.size());
  hamiltonian_action(bp, basis, c0, hc);
  const double e0 = std::real(c0.dot(hc));  // Eigen dot conjugates the lhs

  Trajectory traj;
  traj.model = "bh";
  traj.n_particles = basis.n_particles();
  traj.m_sites = basis.n_modes();
  traj.e0_shift = e0;

  auto rhs = [&](double, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
    hamiltonian_action(bp, basis, y, dy);
    dy -= e0 * y;
    dy *= std::complex<double>(0.0, -1.0);
  };

  Eigen::VectorXcd y = c0;
  OdeStats stats;
  double t = 0.0;
  const long n_samples = std::max(1L, std::lround(t_final / sample_dt));
  auto record = [&](double tt, const Eigen::VectorXcd& yy) {
    Sample s;
    s.t = tt;
    s.c = yy * std::exp(std::complex<double>(0.0, -e0 * tt));
    s.j_bond = bp.j_bond;
    s.eps = bp.eps;
    s.u = bp.u;
    auto rd = reduced_densities(s.c, basis);
    s.rho1 = rd.rho1;
    s.rho2diag = rd.rho2diag;
    Eigen::VectorXcd hy(yy.size());
    hamiltonian_action(bp, basis, yy, hy);
    s.energy = std::real(yy.dot(hy));
    traj.samples.push_back(std::move(s));
  };
  record(0.0, y);
  for (long i = 1; i <= n_samples; ++i) {
    const double t_next = (i == n_samples) ? t_final : i * sample_dt;
    integrate_adaptive(rhs, y, t, t_next, opts, stats,
                       [&](double, Eigen::VectorXcd& yy) {
                         const double nrm = yy.norm();
                         traj.conservation.max_norm_drift = std::max(
                             traj.conservation.max_norm_drift,
                             std::abs(nrm - 1.0));
                         yy /= nrm;
                         return true;
                       });
    t = t_next;
    record(t, y);
  }
  double e_scale = std::max(std::abs(traj.samples[0].energy), 1e-30);
  for (const auto& s : traj.samples)
    traj.conservation.max_energy_drift =
        std::max(traj.conservation.max_energy_drift,
                 std::abs(s.energy - traj.samples[0].energy) / e_scale);
  traj.ode_steps = stats.accepted;
  traj.ode_rejected = stats.rejected;
  return traj;
}

}  // namespace tdbh
