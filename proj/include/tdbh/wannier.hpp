#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <vector>

#include "tdbh/errors.hpp"
#include "tdbh/grid.hpp"
#include "tdbh/single_particle.hpp"

namespace tdbh {

/// Static multi-band Wannier functions w_k^alpha(x) on the grid.
///
/// Stored as real unit-norm grid vectors; orbital index i = k * n_bands + alpha
/// (site-major). Physical functions are column / sqrt(dx).
struct WannierBasis {
  int m_sites = 0;
  int n_bands = 0;
  int n_grid = 0;
  double dx = 0.0;
  Eigen::MatrixXd functions;         // n_grid x (m_sites * n_bands)
  std::vector<double> site_centers;  // x_k
  Eigen::MatrixXd gauge_overlaps;    // m_sites x n_bands, reference overlaps
  std::vector<int> band_parity;      // +1 / -1 about the site center

  int orbital(int site, int band) const { return site * n_bands + band; }
  Eigen::VectorXd w(int site, int band) const {
    return functions.col(orbital(site, band));
  }
};

namespace detail {

/// Reference function of band alpha (0-based): harmonic-oscillator-like
/// Hermite(alpha) * Gaussian centered on the well, width a quarter period.
/// For alpha = 0 this is the plain reference Gaussian; higher bands need the
/// matching nodal structure or the gauge overlap vanishes by parity.
inline Eigen::VectorXd reference_function(const SpatialGrid& g, double center,
                                          int alpha) {
  const double sigma = std::numbers::pi / 4.0;
  Eigen::VectorXd f(g.n);
  for (int j = 0; j < g.n; ++j) {
    double u = std::fmod(g.x[j] - center + 0.5 * g.length, g.length);
    if (u < 0) u += g.length;
    u = (u - 0.5 * g.length) / sigma;
    // Hermite polynomial H_alpha(u) by recurrence
    double h0 = 1.0, h1 = 2.0 * u;
    double h = (alpha == 0) ? h0 : h1;
    for (int m = 2; m <= alpha; ++m) {
      const double h2 = 2.0 * u * h1 - 2.0 * (m - 1) * h0;
      h0 = h1;
      h1 = h2;
      h = h2;
    }
    f[j] = h * std::exp(-0.5 * u * u);
  }
  f.normalize();
  return f;
}

}  // namespace detail

/// Builds site-localized orthonormal Wannier functions for the lowest
/// nu_max bands.
///
/// Per band: the home-cell indicator is projected into the band subspace and
/// its top eigenvector taken per site (for M = 2 the two site functions are
/// exactly orthogonal since the cells partition the ring); sites are then
/// Lowdin-orthonormalized and the sign fixed so the overlap with the
/// site-centered reference function is positive.
inline WannierBasis build_wannier(const SpectralData& sd, const SpatialGrid& g,
                                  int nu_max) {
  const int M = sd.m_sites;
  if (nu_max < 1 || nu_max > sd.n_bands)
    throw ConfigError("nu_max exceeds the number of solved bands");

  // Degenerate band edges make the band subspaces ill-defined; refuse to
  // gauge-fix instead of silently mixing bands. The threshold sits above the
  // dense-solver backward error and below the smallest physical gap in scope.
  const double e_scale = std::max(1.0, sd.eigenvalues.cwiseAbs().maxCoeff());
  const double gap_floor = std::max(1e-11, 1e3 * 2.2e-16 * e_scale);
  for (int a = 1; a <= nu_max; ++a) {
    if (a * M >= sd.eigenvalues.size()) break;  // no state beyond the edge
    const double gap = sd.eigenvalues[a * M] - sd.eigenvalues[a * M - 1];
    if (gap < gap_floor)
      throw GaugeError("degenerate band edge between band " +
                       std::to_string(a) + " and " + std::to_string(a + 1) +
                       " (gap " + std::to_string(gap) + ")");
  }

  WannierBasis wb;
  wb.m_sites = M;
  wb.n_bands = nu_max;
  wb.n_grid = g.n;
  wb.dx = g.dx;
  wb.functions.resize(g.n, M * nu_max);
  wb.gauge_overlaps.resize(M, nu_max);
  wb.band_parity.assign(nu_max, 0);
  const double period = g.length / M;
  for (int k = 0; k < M; ++k) wb.site_centers.push_back(period / 2 + k * period);

  for (int a = 0; a < nu_max; ++a) {
    const Eigen::MatrixXd states = sd.eigenvectors.middleCols(a * M, M);
    Eigen::MatrixXd cols(g.n, M);
    for (int k = 0; k < M; ++k) {
      // home-cell indicator projected into the band
      Eigen::VectorXd cell = Eigen::VectorXd::Zero(g.n);
      for (int j = 0; j < g.n; ++j) {
        double u = std::fmod(g.x[j] - wb.site_centers[k] + 0.5 * period,
                             g.length);
        if (u < 0) u += g.length;
        if (u < period) cell[j] = 1.0;
      }
      const Eigen::MatrixXd q =
          states.transpose() * cell.asDiagonal() * states;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> qs(
          0.5 * (q + q.transpose()));
      cols.col(k) = states * qs.eigenvectors().col(M - 1);
    }
    // Lowdin orthonormalization across sites
    const Eigen::MatrixXd s = cols.transpose() * cols;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ss(
        0.5 * (s + s.transpose()));
    if (ss.eigenvalues().minCoeff() < 1e-8)
      throw GaugeError("band " + std::to_string(a + 1) +
                       ": site functions nearly dependent");
    const Eigen::MatrixXd s_invsqrt =
        ss.eigenvectors() *
        ss.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
        ss.eigenvectors().transpose();
    cols = (cols * s_invsqrt).eval();

    for (int k = 0; k < M; ++k) {
      const Eigen::VectorXd ref =
          detail::reference_function(g, wb.site_centers[k], a);
      const double ov = cols.col(k).dot(ref);
      if (std::abs(ov) < 1e-6)
        throw GaugeError("band " + std::to_string(a + 1) + " site " +
                         std::to_string(k) +
                         ": reference overlap too small to fix the gauge");
      wb.gauge_overlaps(k, a) = ov;
      wb.functions.col(wb.orbital(k, a)) = cols.col(k) * (ov >= 0 ? 1.0 : -1.0);
    }

    // parity about the site center (grid reflection j -> 2*c - j)
    const int c = static_cast<int>(std::lround(wb.site_centers[0] / g.dx));
    const Eigen::VectorXd& w0 = wb.functions.col(wb.orbital(0, a));
    double refl = 0.0;
    for (int j = 0; j < g.n; ++j) refl += w0[g.index_wrap(2 * c - j)] * w0[j];
    wb.band_parity[a] = refl >= 0 ? 1 : -1;
  }
  return wb;
}

/// Home-cell probability of an orbital (localization diagnostic).
inline double home_cell_probability(const WannierBasis& wb, int site,
                                    int band) {
  const double period = wb.dx * wb.n_grid / wb.m_sites;
  const Eigen::VectorXd w = wb.w(site, band);
  double p = 0.0;
  for (int j = 0; j < wb.n_grid; ++j) {
    double u = std::fmod(j * wb.dx - wb.site_centers[site] + 0.5 * period,
                         wb.dx * wb.n_grid);
    if (u < 0) u += wb.dx * wb.n_grid;
    if (u < period) p += w[j] * w[j];
  }
  return p;
}

}  // namespace tdbh
