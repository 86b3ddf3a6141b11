#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

namespace tdbh {

/// One recorded snapshot of a propagated trajectory.
struct Sample {
  double t = 0.0;
  Eigen::VectorXcd c;             // coefficient vector in the model basis
  Eigen::MatrixXcd d;             // TDBH band amplitudes (nu x M); empty otherwise
  std::vector<std::complex<double>> j_bond;  // instantaneous hopping per bond
  std::vector<double> eps;        // one-body energy per site
  std::vector<double> u;          // interaction per site
  Eigen::MatrixXcd rho1;
  Eigen::VectorXd rho2diag;
  Eigen::VectorXd natocc;         // descending, normalized to sum 1
  double energy = 0.0;
  double parity = 0.0;
};

/// Conservation-law bookkeeping accumulated while propagating.
struct ConservationReport {
  double max_norm_drift = 0.0;    // max per-step |1 - ||C||| before renorm
  double max_orbital_drift = 0.0; // same for the d rows
  double max_energy_drift = 0.0;  // relative to t = 0
  double max_parity_drift = 0.0;
  double max_odd_band = 0.0;      // odd-band amplitude leakage (TDBH)
  double max_im_j = 0.0;
};

struct Trajectory {
  std::string model;  // "bh", "tdbh" or "exact"
  int n_particles = 0;
  int m_sites = 0;
  int nu = 0;
  int kappa = 0;
  double e0_shift = 0.0;  // constant energy shift used during integration
  std::vector<Sample> samples;
  ConservationReport conservation;
  long ode_steps = 0;
  long ode_rejected = 0;
};

}  // namespace tdbh
