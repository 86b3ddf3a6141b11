#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "tdbh/errors.hpp"

namespace tdbh {

/// Ring lattice V(x) = v0 cos^2(x), period pi, in units hbar = m = 1.
/// The recoil energy of this lattice is E_r = 1/2.
struct LatticeSpec {
  double v0 = 12.5;  // potential depth (25 E_r at the default)
  int m_sites = 2;
  int n_grid = 256;

  double domain_length() const { return std::numbers::pi * m_sites; }
  static constexpr double recoil_energy() { return 0.5; }

  void validate() const {
    if (m_sites < 2) throw ConfigError("m_sites must be >= 2");
    if (v0 < 0.0) throw ConfigError("v0 must be >= 0");
    if (n_grid < 64) throw ConfigError("n_grid must be >= 64");
    if (n_grid % 2 != 0) throw ConfigError("n_grid must be even");
    if (n_grid % m_sites != 0)
      throw ConfigError("n_grid must be divisible by m_sites");
  }
};

/// Uniform periodic grid with Fourier differentiation metadata.
struct SpatialGrid {
  double length = 0.0;
  int n = 0;
  double dx = 0.0;
  Eigen::VectorXd x;           // grid points, x_j = j dx
  Eigen::VectorXd wavenumber;  // k_m in FFT bin order

  int index_wrap(int j) const { return ((j % n) + n) % n; }
};

inline SpatialGrid build_grid(const LatticeSpec& spec) {
  spec.validate();
  SpatialGrid g;
  g.length = spec.domain_length();
  g.n = spec.n_grid;
  g.dx = g.length / g.n;
  g.x.resize(g.n);
  g.wavenumber.resize(g.n);
  const double dk = 2.0 * std::numbers::pi / g.length;
  for (int j = 0; j < g.n; ++j) {
    g.x[j] = j * g.dx;
    const int m = (j <= g.n / 2 - 1) ? j : j - g.n;  // FFT bin convention
    g.wavenumber[j] = m * dk;
  }
  return g;
}

}  // namespace tdbh
