#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "tdbh/errors.hpp"
#include "tdbh/grid.hpp"
#include "tdbh/single_particle.hpp"
#include "tdbh/wannier.hpp"

namespace tdbh {

using Complex = std::complex<double>;

/// One- and two-body matrix elements in the static Wannier basis.
///
/// h(i, j) = <w_i | h | w_j> over orbital indices i = site * n_bands + band,
/// restricted to on-site and nearest-neighbor site pairs (entries for more
/// distant pairs are zero; the oracle builds its own full matrix).
/// u_onsite[k] is the flattened nu^4 tensor
///   U_k^{abcd} = lambda0 * integral w_k^a* w_k^b* w_k^c w_k^d dx
/// with index ((a*nu + b)*nu + c)*nu + d.
struct MatrixElements {
  int m_sites = 0;
  int n_bands = 0;
  double lambda0 = 0.0;
  Eigen::MatrixXcd h;
  std::vector<Eigen::VectorXcd> u_onsite;

  Complex u(int site, int a, int b, int c, int d) const {
    const int nu = n_bands;
    return u_onsite[site][((a * nu + b) * nu + c) * nu + d];
  }
  /// On-site band energy eps_k^alpha (real part of the diagonal).
  double eps_band(int site, int band) const {
    return h(orbital(site, band), orbital(site, band)).real();
  }
  /// Hopping element h_{k alpha, q alpha} between neighboring sites.
  Complex hop_band(int site_from, int site_to, int band) const {
    return h(orbital(site_from, band), orbital(site_to, band));
  }
  int orbital(int site, int band) const { return site * n_bands + band; }
};

namespace detail {

inline bool sites_adjacent(int k, int q, int m_sites) {
  if (k == q) return true;
  const int diff = ((k - q) % m_sites + m_sites) % m_sites;
  return diff == 1 || diff == m_sites - 1;
}

}  // namespace detail

/// All h_{k alpha, q beta} for q in {k, k+-1 mod M}; symmetrized accumulation
/// so hermiticity holds exactly as computed.
inline Eigen::MatrixXcd one_body_tensor(const WannierBasis& wb,
                                        const SpatialGrid& g, double v0) {
  const Eigen::MatrixXd hgrid = grid_hamiltonian(g, v0);
  const int n_orb = wb.m_sites * wb.n_bands;
  const Eigen::MatrixXd hw = hgrid * wb.functions;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n_orb, n_orb);
  for (int i = 0; i < n_orb; ++i) {
    const int ki = i / wb.n_bands;
    for (int j = i; j < n_orb; ++j) {
      const int kj = j / wb.n_bands;
      if (!detail::sites_adjacent(ki, kj, wb.m_sites)) continue;
      const double v = wb.functions.col(i).dot(hw.col(j));
      h(i, j) = Complex(v, 0.0);
      h(j, i) = std::conj(h(i, j));
    }
  }
  return h;
}

/// Complete one-body matrix over all orbital pairs (oracle scope).
inline Eigen::MatrixXcd one_body_full(const WannierBasis& wb,
                                      const SpatialGrid& g, double v0) {
  const Eigen::MatrixXd hgrid = grid_hamiltonian(g, v0);
  const int n_orb = wb.m_sites * wb.n_bands;
  const Eigen::MatrixXd hw = hgrid * wb.functions;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n_orb, n_orb);
  for (int i = 0; i < n_orb; ++i)
    for (int j = i; j < n_orb; ++j) {
      const double v = wb.functions.col(i).dot(hw.col(j));
      h(i, j) = Complex(v, 0.0);
      h(j, i) = std::conj(h(i, j));
    }
  return h;
}

/// On-site interaction tensors per site (TDBH scope).
inline std::vector<Eigen::VectorXcd> interaction_tensor_onsite(
    const WannierBasis& wb, double lambda0) {
  if (lambda0 < 0) throw ConfigError("lambda0 must be >= 0");
  const int nu = wb.n_bands;
  std::vector<Eigen::VectorXcd> out;
  out.reserve(wb.m_sites);
  for (int k = 0; k < wb.m_sites; ++k) {
    // pair products B_{(ab), j} = w^a(x_j) w^b(x_j); U = lambda0 B B^T / dx
    Eigen::MatrixXd b(nu * nu, wb.n_grid);
    for (int a = 0; a < nu; ++a)
      for (int bb = 0; bb < nu; ++bb)
        b.row(a * nu + bb) = (wb.w(k, a).array() * wb.w(k, bb).array());
    const Eigen::MatrixXd u = (lambda0 / wb.dx) * (b * b.transpose());
    Eigen::VectorXcd flat(nu * nu * nu * nu);
    for (int ab = 0; ab < nu * nu; ++ab)
      for (int cd = 0; cd < nu * nu; ++cd)
        flat[ab * nu * nu + cd] = Complex(u(ab, cd), 0.0);
    out.push_back(std::move(flat));
  }
  return out;
}

/// Full two-body contact tensor over all (site, band) orbitals, flattened as
/// ((i*n + j)*n + k)*n + l with n = m_sites * n_bands (oracle scope).
inline Eigen::VectorXcd interaction_tensor_full(const WannierBasis& wb,
                                                double lambda0) {
  if (lambda0 < 0) throw ConfigError("lambda0 must be >= 0");
  const int n_orb = wb.m_sites * wb.n_bands;
  Eigen::MatrixXd b(n_orb * n_orb, wb.n_grid);
  for (int i = 0; i < n_orb; ++i)
    for (int j = 0; j < n_orb; ++j)
      b.row(i * n_orb + j) =
          (wb.functions.col(i).array() * wb.functions.col(j).array());
  const Eigen::MatrixXd u = (lambda0 / wb.dx) * (b * b.transpose());
  Eigen::VectorXcd flat(static_cast<long>(n_orb) * n_orb * n_orb * n_orb);
  for (int ij = 0; ij < n_orb * n_orb; ++ij)
    for (int kl = 0; kl < n_orb * n_orb; ++kl)
      flat[static_cast<long>(ij) * n_orb * n_orb + kl] = Complex(u(ij, kl), 0.0);
  return flat;
}

inline MatrixElements build_elements(const WannierBasis& wb,
                                     const SpatialGrid& g, double v0,
                                     double lambda0) {
  MatrixElements me;
  me.m_sites = wb.m_sites;
  me.n_bands = wb.n_bands;
  me.lambda0 = lambda0;
  me.h = one_body_tensor(wb, g, v0);
  me.u_onsite = interaction_tensor_onsite(wb, lambda0);
  return me;
}

}  // namespace tdbh
