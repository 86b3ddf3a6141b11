#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "tdbh/errors.hpp"
#include "tdbh/grid.hpp"

namespace tdbh {

/// Eigenpairs of h = -1/2 d^2/dx^2 + V(x) on the periodic grid, grouped
/// into bands of m_sites states each.
struct SpectralData {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // columns, unit norm as grid vectors
  int m_sites = 0;
  int n_bands = 0;  // complete bands retained

  int band_of(int state) const { return state / m_sites; }
  int index_in_band(int state) const { return state % m_sites; }
};

/// Dense grid Hamiltonian with spectral (Fourier) kinetic energy. The
/// kinetic part is circulant: T_{jl} = (1/n) sum_m (k_m^2/2) cos(k_m (x_j-x_l)).
inline Eigen::MatrixXd grid_hamiltonian(const SpatialGrid& g, double v0) {
  const int n = g.n;
  Eigen::VectorXd stencil(n);
  for (int d = 0; d < n; ++d) {
    double s = 0.0;
    for (int m = 0; m < n; ++m) {
      const double k = g.wavenumber[m];
      s += 0.5 * k * k * std::cos(k * d * g.dx);
    }
    stencil[d] = s / n;
  }
  Eigen::MatrixXd h(n, n);
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l) h(j, l) = stencil[g.index_wrap(j - l)];
  h = 0.5 * (h + h.transpose()).eval();
  for (int j = 0; j < n; ++j) {
    const double c = std::cos(g.x[j]);
    h(j, j) += v0 * c * c;
  }
  return h;
}

/// Solves the single-particle problem; returns the lowest n_bands complete
/// bands (all eigenpairs are computed, n_bands <= n/m_sites are retained).
inline SpectralData solve_single_particle(const SpatialGrid& g, double v0,
                                          int m_sites, int n_bands) {
  if (n_bands < 1 || n_bands * m_sites > g.n)
    throw ConfigError("n_bands out of range for this grid");
  const Eigen::MatrixXd h = grid_hamiltonian(g, v0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  if (solver.info() != Eigen::Success)
    throw NumericalError("single-particle eigensolver did not converge");

  const int n_states = n_bands * m_sites;
  SpectralData sd;
  sd.eigenvalues = solver.eigenvalues().head(n_states);
  sd.eigenvectors = solver.eigenvectors().leftCols(n_states);
  sd.m_sites = m_sites;
  sd.n_bands = n_bands;

  // residual report, ||h phi - E phi|| per retained state
  double max_resid = 0.0;
  for (int i = 0; i < n_states; ++i) {
    const double r = (h * sd.eigenvectors.col(i) -
                      sd.eigenvalues[i] * sd.eigenvectors.col(i))
                         .norm();
    max_resid = std::max(max_resid, r);
  }
  if (max_resid > 1e-9)
    throw NumericalError("eigenpair residual " + std::to_string(max_resid) +
                         " exceeds 1e-9");
  return sd;
}

}  // namespace tdbh
