#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <fstream>
#include <iomanip>
#include <set>
#include <string>
#include <vector>

#include "tdbh/bh.hpp"
#include "tdbh/errors.hpp"
#include "tdbh/fock.hpp"
#include "tdbh/matrix_elements.hpp"
#include "tdbh/ode.hpp"
#include "tdbh/trajectory.hpp"

namespace tdbh {

/// Joint variational state: coefficient vector over the site Fock basis plus
/// per-site band-amplitude vectors d_k^alpha (column k = site k).
struct TDBHState {
  Eigen::VectorXcd c;
  Eigen::MatrixXcd d;  // nu x m_sites
  double t = 0.0;
};

/// Lowest-band initial amplitudes (d_k = e_1 on every site).
inline Eigen::MatrixXcd lowest_band_amplitudes(int nu, int m_sites) {
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(nu, m_sites);
  for (int k = 0; k < m_sites; ++k) d(0, k) = 1.0;
  return d;
}

/// The coupled coefficient/orbital equations of motion, evaluated in band
/// amplitude space where the projector is P_k v = v - d_k <d_k, v>.
class TDBHModel {
 public:
  TDBHModel(const MatrixElements& me, const FockBasis& basis,
            std::vector<int> band_parity, double eps_reg = 0.0)
      : basis_(basis),
        m_sites_(me.m_sites),
        nu_(me.n_bands),
        band_parity_(std::move(band_parity)),
        bonds_(ring_bonds(me.m_sites)),
        u_onsite_(me.u_onsite) {
    eps_reg_ = eps_reg > 0 ? eps_reg : 1e-8 * basis.n_particles();
    eps_band_.resize(nu_, m_sites_);
    for (int k = 0; k < m_sites_; ++k)
      for (int a = 0; a < nu_; ++a) eps_band_(a, k) = me.eps_band(k, a);
    hop_pair_.assign(m_sites_ * m_sites_, Eigen::VectorXcd());
    for (int k = 0; k < m_sites_; ++k)
      for (int l : neighbors(k)) {
        Eigen::VectorXcd h(nu_);
        for (int a = 0; a < nu_; ++a) h[a] = me.hop_band(k, l, a);
        hop_pair_[k * m_sites_ + l] = std::move(h);
      }
  }

  const FockBasis& basis() const { return basis_; }
  int n_bands() const { return nu_; }
  int m_sites() const { return m_sites_; }
  double eps_reg() const { return eps_reg_; }
  const std::vector<int>& band_parity() const { return band_parity_; }

  std::vector<int> neighbors(int k) const {
    std::set<int> nb{(k + 1) % m_sites_, (k - 1 + m_sites_) % m_sites_};
    nb.erase(k);
    return {nb.begin(), nb.end()};
  }

  /// Instantaneous Hamiltonian parameters from the band amplitudes:
  /// J_{kq}(t) = -sum_a d_k^a* h_{ka,qa} d_q^a, eps_k = sum_a |d_k^a|^2 eps_k^a,
  /// U_k = sum_{abcd} d^a* d^b* U_k^{abcd} d^c d^d.
  BondParams params(const Eigen::MatrixXcd& d) const {
    BondParams p;
    p.bonds = bonds_;
    for (const auto& [k, q] : bonds_) {
      std::complex<double> j = 0.0;
      const auto& h = hop_pair_[k * m_sites_ + q];
      for (int a = 0; a < nu_; ++a) j += std::conj(d(a, k)) * h[a] * d(a, q);
      p.j_bond.push_back(-j);
    }
    for (int k = 0; k < m_sites_; ++k) {
      double e = 0.0;
      for (int a = 0; a < nu_; ++a) e += std::norm(d(a, k)) * eps_band_(a, k);
      p.eps.push_back(e);
      p.u.push_back(std::real(u_contraction(k, d.col(k))));
    }
    return p;
  }

  /// (U_k(d))_a = sum_{bcd} U_k^{abcd} d_b* d_c d_d.
  Eigen::VectorXcd u_apply(int k, const Eigen::VectorXcd& d) const {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(nu_);
    const auto& u = u_onsite_[k];
    for (int a = 0; a < nu_; ++a) {
      std::complex<double> s = 0.0;
      for (int b = 0; b < nu_; ++b) {
        const std::complex<double> db = std::conj(d[b]);
        if (db == std::complex<double>(0.0, 0.0)) continue;
        for (int c = 0; c < nu_; ++c) {
          const std::complex<double> dc = d[c];
          if (dc == std::complex<double>(0.0, 0.0)) continue;
          const long base = ((long(a) * nu_ + b) * nu_ + c) * nu_;
          std::complex<double> inner = 0.0;
          for (int e = 0; e < nu_; ++e) inner += u[base + e] * d[e];
          s += db * dc * inner;
        }
      }
      out[a] = s;
    }
    return out;
  }

  std::complex<double> u_contraction(int k, const Eigen::VectorXcd& d) const {
    const Eigen::VectorXcd ud = u_apply(k, d);
    std::complex<double> s = 0.0;
    for (int a = 0; a < nu_; ++a) s += std::conj(d[a]) * ud[a];
    return s;
  }

  /// Orbital equation right-hand side. With v_k = h_k d_k
  /// + sum_{l = k+-1} (rho_kl / rho~_kk) h^{(kl)} d_l
  /// + (rho_kkkk / rho~_kk) U_k(d_k), returns ddot_k = -i (v_k - d_k <d_k,v_k>).
  /// rho~_kk is the smoothly regularized density.
  Eigen::MatrixXcd orbital_rhs(const Eigen::MatrixXcd& d,
                               const ReducedDensities& rd) const {
    Eigen::MatrixXcd ddot(nu_, m_sites_);
    for (int k = 0; k < m_sites_; ++k) {
      const double rho_kk = std::real(rd.rho1(k, k));
      if (rho_kk < -1e-12)
        throw NumericalError("negative site density rho_" + std::to_string(k) +
                             std::to_string(k) + " = " + std::to_string(rho_kk));
      const double rho_reg =
          rho_kk + eps_reg_ * std::exp(-std::max(rho_kk, 0.0) / eps_reg_);
      Eigen::VectorXcd v =
          eps_band_.col(k).cast<std::complex<double>>().cwiseProduct(d.col(k));
      for (int l : neighbors(k)) {
        const std::complex<double> w = rd.rho1(k, l) / rho_reg;
        v += w * hop_pair_[k * m_sites_ + l].cwiseProduct(d.col(l));
      }
      v += (rd.rho2diag[k] / rho_reg) * u_apply(k, d.col(k));
      const std::complex<double> proj = d.col(k).dot(v);  // <d_k, v>
      ddot.col(k) =
          std::complex<double>(0.0, -1.0) * (v - proj * d.col(k));
    }
    return ddot;
  }

 private:
  const FockBasis& basis_;
  int m_sites_, nu_;
  double eps_reg_;
  std::vector<int> band_parity_;
  std::vector<std::pair<int, int>> bonds_;
  std::vector<Eigen::VectorXcd> u_onsite_;
  Eigen::MatrixXd eps_band_;              // nu x M
  std::vector<Eigen::VectorXcd> hop_pair_;  // index k*M + l, adjacent pairs
};

namespace detail {

inline void pack(const TDBHState& s, Eigen::VectorXcd& y) {
  const long dim = s.c.size();
  const long nd = s.d.size();
  y.resize(dim + nd);
  y.head(dim) = s.c;
  y.tail(nd) = Eigen::Map<const Eigen::VectorXcd>(s.d.data(), nd);
}

inline void unpack(const Eigen::VectorXcd& y, long dim, int nu, int m,
                   TDBHState& s) {
  s.c = y.head(dim);
  s.d = Eigen::Map<const Eigen::MatrixXcd>(y.data() + dim, nu, m);
}

/// Coefficient-exchange parity <P> for the two-site ring.
inline double exchange_parity(const Eigen::VectorXcd& c,
                              const FockBasis& basis) {
  if (basis.n_modes() != 2) return 1.0;
  std::complex<double> p = 0.0;
  std::vector<int> tmp(2);
  for (std::uint64_t r = 0; r < basis.size(); ++r) {
    const auto cfg = basis.config(r);
    tmp[0] = cfg[1];
    tmp[1] = cfg[0];
    p += std::conj(c[basis.rank(tmp)]) * c[r];
  }
  return p.real();
}

}  // namespace detail

/// Jointly integrates (C, d) with one adaptive embedded Runge-Kutta scheme.
/// After each accepted step C and every d_k are renormalized (drift logged;
/// aborts when a single step drifts above abort_drift). The coefficient
/// equation runs in the gauge H - E0 with E0 = <C0|H(0)|C0>; recorded samples
/// carry the true gauge.
inline Trajectory propagate_tdbh(const TDBHState& init, const TDBHModel& model,
                                 double t_final, double sample_dt,
                                 const OdeOptions& opts = {},
                                 double abort_drift = 1e-6) {
  const FockBasis& basis = model.basis();
  const long dim = static_cast<long>(basis.size());
  const int nu = model.n_bands();
  const int m = model.m_sites();
  if (std::abs(init.c.norm() - 1.0) > 1e-8)
    throw ConfigError("propagate_tdbh: initial C not normalized");
  for (int k = 0; k < m; ++k)
    if (std::abs(init.d.col(k).norm() - 1.0) > 1e-8)
      throw ConfigError("propagate_tdbh: initial d_" + std::to_string(k) +
                        " not normalized");

  Trajectory traj;
  traj.model = "tdbh";
  traj.n_particles = basis.n_particles();
  traj.m_sites = m;
  traj.nu = nu;

  const BondParams p0 = model.params(init.d);
  Eigen::VectorXcd hc(dim);
  hamiltonian_action(p0, basis, init.c, hc);
  const double e0 = std::real(init.c.dot(hc));
  traj.e0_shift = e0;

  Eigen::VectorXcd y;
  detail::pack(init, y);
  TDBHState work;
  Eigen::VectorXcd hold(dim);

  auto rhs = [&](double, const Eigen::VectorXcd& yy, Eigen::VectorXcd& dy) {
    detail::unpack(yy, dim, nu, m, work);
    const BondParams p = model.params(work.d);
    dy.resize(yy.size());
    auto dc = dy.head(dim);
    Eigen::Map<Eigen::VectorXcd> hview(hold.data(), dim);
    hamiltonian_action(p, basis, work.c, hold);
    dc = std::complex<double>(0.0, -1.0) * (hold - e0 * work.c);
    const ReducedDensities rd = reduced_densities(work.c, basis, false);
    const Eigen::MatrixXcd ddot = model.orbital_rhs(work.d, rd);
    dy.tail(nu * m) = Eigen::Map<const Eigen::VectorXcd>(ddot.data(), nu * m);
  };

  OdeStats stats;
  auto renorm = [&](double, Eigen::VectorXcd& yy) {
    const double cn = yy.head(dim).norm();
    traj.conservation.max_norm_drift =
        std::max(traj.conservation.max_norm_drift, std::abs(cn - 1.0));
    if (std::abs(cn - 1.0) > abort_drift)
      throw NumericalError("coefficient norm drifted by " +
                           std::to_string(cn - 1.0) + " in one step");
    yy.head(dim) /= cn;
    for (int k = 0; k < m; ++k) {
      auto dk = yy.segment(dim + k * nu, nu);
      const double dn = dk.norm();
      traj.conservation.max_orbital_drift =
          std::max(traj.conservation.max_orbital_drift, std::abs(dn - 1.0));
      if (std::abs(dn - 1.0) > abort_drift)
        throw NumericalError("orbital norm drifted by " +
                             std::to_string(dn - 1.0) + " in one step");
      dk /= dn;
    }
    return true;
  };

  auto record = [&](double tt, const Eigen::VectorXcd& yy) {
    detail::unpack(yy, dim, nu, m, work);
    Sample s;
    s.t = tt;
    s.c = work.c * std::exp(std::complex<double>(0.0, -e0 * tt));
    s.d = work.d;
    const BondParams p = model.params(work.d);
    s.j_bond = p.j_bond;
    s.eps = p.eps;
    s.u = p.u;
    const ReducedDensities rd = reduced_densities(s.c, basis, false);
    s.rho1 = rd.rho1;
    s.rho2diag = rd.rho2diag;
    hamiltonian_action(p, basis, work.c, hold);
    s.energy = std::real(work.c.dot(hold));
    s.parity = detail::exchange_parity(work.c, basis);
    for (const auto& j : p.j_bond)
      traj.conservation.max_im_j =
          std::max(traj.conservation.max_im_j, std::abs(j.imag()));
    for (int k = 0; k < m; ++k)
      for (int a = 0; a < nu; ++a)
        if (model.band_parity()[a] < 0)
          traj.conservation.max_odd_band =
              std::max(traj.conservation.max_odd_band, std::abs(work.d(a, k)));
    traj.samples.push_back(std::move(s));
  };

  record(0.0, y);
  double t = 0.0;
  const long n_samples = std::max(1L, std::lround(t_final / sample_dt));
  for (long i = 1; i <= n_samples; ++i) {
    const double t_next = (i == n_samples) ? t_final : i * sample_dt;
    integrate_adaptive(rhs, y, t, t_next, opts, stats, renorm);
    t = t_next;
    record(t, y);
  }
  const double e_scale = std::max(std::abs(traj.samples[0].energy), 1e-30);
  for (const auto& s : traj.samples) {
    traj.conservation.max_energy_drift =
        std::max(traj.conservation.max_energy_drift,
                 std::abs(s.energy - traj.samples[0].energy) / e_scale);
    traj.conservation.max_parity_drift =
        std::max(traj.conservation.max_parity_drift,
                 std::abs(s.parity - traj.samples[0].parity));
  }
  traj.ode_steps = stats.accepted;
  traj.ode_rejected = stats.rejected;
  return traj;
}

/// Imaginary-time relaxation of the same coupled equations with per-step
/// renormalization; converged when the energy change per unit tau drops
/// below tol. Returns the relaxed state (t field carries the tau reached).
inline TDBHState relax_imaginary_time(const TDBHState& init,
                                      const TDBHModel& model, double tau_max,
                                      double tol,
                                      const OdeOptions& opts_in = {},
                                      double* energy_out = nullptr) {
  const FockBasis& basis = model.basis();
  const long dim = static_cast<long>(basis.size());
  const int nu = model.n_bands();
  const int m = model.m_sites();

  Eigen::VectorXcd y;
  detail::pack(init, y);
  TDBHState work;
  Eigen::VectorXcd hold(dim);

  auto energy_of = [&](const Eigen::VectorXcd& yy) {
    detail::unpack(yy, dim, nu, m, work);
    const BondParams p = model.params(work.d);
    hamiltonian_action(p, basis, work.c, hold);
    return std::real(work.c.dot(hold)) / work.c.squaredNorm();
  };

  auto rhs = [&](double, const Eigen::VectorXcd& yy, Eigen::VectorXcd& dy) {
    detail::unpack(yy, dim, nu, m, work);
    const BondParams p = model.params(work.d);
    dy.resize(yy.size());
    hamiltonian_action(p, basis, work.c, hold);
    const double e = std::real(work.c.dot(hold)) / work.c.squaredNorm();
    dy.head(dim) = -(hold - e * work.c);
    const ReducedDensities rd = reduced_densities(work.c, basis, false);
    // imaginary-time orbital flow: ddot = -(v - d <d, v>)
    Eigen::MatrixXcd ddot = model.orbital_rhs(work.d, rd);
    ddot *= std::complex<double>(0.0, 1.0);  // undo the -i of real time
    dy.tail(nu * m) = -Eigen::Map<const Eigen::VectorXcd>(ddot.data(), nu * m);
  };

  auto renorm = [&](double, Eigen::VectorXcd& yy) {
    yy.head(dim).normalize();
    for (int k = 0; k < m; ++k) yy.segment(dim + k * nu, nu).normalize();
    return true;
  };

  OdeOptions opts = opts_in;
  if (opts.rtol > 1e-8) opts.rtol = 1e-8;  // relaxation accuracy floor
  OdeStats stats;
  double tau = 0.0, e_prev = energy_of(y);
  const double chunk = 1.0;
  while (tau < tau_max) {
    const double tau_next = std::min(tau + chunk, tau_max);
    integrate_adaptive(rhs, y, tau, tau_next, opts, stats, renorm);
    const double e_now = energy_of(y);
    const double rate = std::abs(e_now - e_prev) / (tau_next - tau);
    tau = tau_next;
    e_prev = e_now;
    if (rate < tol) {
      TDBHState out;
      detail::unpack(y, dim, nu, m, out);
      out.t = tau;
      fix_phase(out.c);
      if (energy_out) *energy_out = e_now;
      return out;
    }
  }
  throw NumericalError("imaginary-time relaxation did not converge within " +
                       std::to_string(tau_max));
}

/// Checkpoint record, one CSV row: t, Re/Im C by rank, Re/Im d by (k, alpha).
inline void save_state_record(const TDBHState& s, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open " + path + " for writing");
  f << std::setprecision(17);
  f << s.t;
  for (long i = 0; i < s.c.size(); ++i)
    f << ',' << s.c[i].real() << ',' << s.c[i].imag();
  for (int k = 0; k < s.d.cols(); ++k)
    for (int a = 0; a < s.d.rows(); ++a)
      f << ',' << s.d(a, k).real() << ',' << s.d(a, k).imag();
  f << '\n';
}

inline TDBHState load_state_record(const std::string& path, long dim, int nu,
                                   int m_sites) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open " + path);
  std::string line;
  std::getline(f, line);
  std::vector<double> vals;
  std::size_t pos = 0;
  while (pos < line.size()) {
    std::size_t next = line.find(',', pos);
    if (next == std::string::npos) next = line.size();
    vals.push_back(std::stod(line.substr(pos, next - pos)));
    pos = next + 1;
  }
  const std::size_t expect = 1 + 2 * dim + 2 * static_cast<std::size_t>(nu) * m_sites;
  if (vals.size() != expect)
    throw ConfigError("state record has " + std::to_string(vals.size()) +
                      " fields, expected " + std::to_string(expect));
  TDBHState s;
  s.t = vals[0];
  s.c.resize(dim);
  for (long i = 0; i < dim; ++i)
    s.c[i] = {vals[1 + 2 * i], vals[2 + 2 * i]};
  s.d.resize(nu, m_sites);
  const std::size_t off = 1 + 2 * dim;
  for (int k = 0; k < m_sites; ++k)
    for (int a = 0; a < nu; ++a) {
      const std::size_t j = off + 2 * (k * nu + a);
      s.d(a, k) = {vals[j], vals[j + 1]};
    }
  return s;
}

}  // namespace tdbh
