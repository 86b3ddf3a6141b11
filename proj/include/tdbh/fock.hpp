#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <iostream>
#include <span>
#include <string>
#include <vector>

#include "tdbh/errors.hpp"

namespace tdbh {

/// Occupation-number basis of N bosons on M modes, ordered by descending
/// lexicographic occupation (N,0,..), (N-1,1,..), ...
///
/// Ranking uses the combinatorial number system: O(M) rank with a precomputed
/// binomial table, O(M + N) unrank. Coefficient vectors are contiguous complex
/// arrays indexed by rank.
class FockBasis {
 public:
  FockBasis(int n_particles, int n_modes,
            std::uint64_t dimension_cap = 20'000'000)
      : n_particles_(n_particles), n_modes_(n_modes) {
    if (n_particles < 1 || n_modes < 1)
      throw ConfigError("FockBasis requires N >= 1 and M >= 1");
    build_binomials();
    const std::uint64_t dim = dimension(n_particles_, n_modes_);
    if (dim == 0 || dim > dimension_cap)
      throw DimensionError("Fock space dimension " + std::to_string(dim) +
                           " exceeds cap " + std::to_string(dimension_cap));
    size_ = dim;
    configs_.resize(size_ * n_modes_);
    std::vector<int> cfg(n_modes_, 0);
    cfg[0] = n_particles_;
    for (std::uint64_t r = 0;; ++r) {
      std::copy(cfg.begin(), cfg.end(), configs_.begin() + r * n_modes_);
      if (!next_config(cfg)) break;
    }
  }

  int n_particles() const { return n_particles_; }
  int n_modes() const { return n_modes_; }
  std::uint64_t size() const { return size_; }

  std::span<const int> config(std::uint64_t r) const {
    return {configs_.data() + r * n_modes_, static_cast<std::size_t>(n_modes_)};
  }

  /// Number of configurations of n bosons in m modes, C(n+m-1, n).
  std::uint64_t dimension(int n, int m) const { return binom(n + m - 1, n); }

  std::uint64_t rank(std::span<const int> cfg) const {
    std::uint64_t r = 0;
    int rem = n_particles_;
    for (int j = 0; j < n_modes_ - 1; ++j) {
      const int nj = cfg[j];
      if (nj < rem) {
        // configurations with a larger occupation at slot j come first
        r += binom(rem - nj - 1 + n_modes_ - 1 - j, rem - nj - 1);
      }
      rem -= nj;
    }
    return r;
  }

  std::vector<int> unrank(std::uint64_t r) const {
    std::vector<int> cfg(n_modes_, 0);
    int rem = n_particles_;
    for (int j = 0; j < n_modes_ - 1; ++j) {
      // prefix(v) = #configs with occupation > v at this slot; decrement the
      // occupation while the next prefix still fits below r
      int nj = rem;
      while (nj > 0 && binom(rem - nj + n_modes_ - 1 - j, rem - nj) <= r)
        --nj;
      if (nj < rem) r -= binom(rem - nj - 1 + n_modes_ - 1 - j, rem - nj - 1);
      cfg[j] = nj;
      rem -= nj;
    }
    cfg[n_modes_ - 1] = rem;
    return cfg;
  }

 private:
  void build_binomials() {
    const int top = n_particles_ + n_modes_;
    binom_.assign(static_cast<std::size_t>(top + 1) * (top + 1), 0);
    for (int a = 0; a <= top; ++a) {
      at(a, 0) = 1;
      for (int b = 1; b <= a; ++b) {
        const std::uint64_t v = at(a - 1, b - 1) + (b <= a - 1 ? at(a - 1, b) : 0);
        at(a, b) = v;
      }
    }
  }
  std::uint64_t& at(int a, int b) {
    return binom_[static_cast<std::size_t>(a) * (n_particles_ + n_modes_ + 1) + b];
  }
  std::uint64_t binom(int a, int b) const {
    if (b < 0 || b > a || a < 0) return 0;
    return binom_[static_cast<std::size_t>(a) * (n_particles_ + n_modes_ + 1) + b];
  }
  /// Advances to the next configuration in descending lexicographic order.
  bool next_config(std::vector<int>& cfg) const {
    // find rightmost slot (except the last) with nonzero occupation
    int j = n_modes_ - 2;
    while (j >= 0 && cfg[j] == 0) --j;
    if (j < 0) return false;
    --cfg[j];
    int carry = cfg[n_modes_ - 1] + 1;
    cfg[n_modes_ - 1] = 0;
    cfg[j + 1] = carry;
    return true;
  }

  int n_particles_, n_modes_;
  std::uint64_t size_ = 0;
  std::vector<int> configs_;
  std::vector<std::uint64_t> binom_;
};

/// First- and second-order reduced density matrix elements.
struct ReducedDensities {
  Eigen::MatrixXcd rho1;     // rho_kq = <b_k^dag b_q>
  Eigen::VectorXd rho2diag;  // rho_kkkk = <n_k (n_k - 1)>
};

/// Returns (b_k^dag b_q) C with amplitude sqrt(n_q (n_k + 1)) per transition.
inline Eigen::VectorXcd hop_action(const Eigen::VectorXcd& c, int k, int q,
                                   const FockBasis& basis) {
  if (k == q || k < 0 || q < 0 || k >= basis.n_modes() || q >= basis.n_modes())
    throw ConfigError("hop_action: invalid mode indices");
  if (static_cast<std::uint64_t>(c.size()) != basis.size())
    throw ConfigError("hop_action: coefficient size mismatch");
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(c.size());
  std::vector<int> tmp(basis.n_modes());
  for (std::uint64_t r = 0; r < basis.size(); ++r) {
    const auto cfg = basis.config(r);
    if (cfg[q] == 0) continue;
    std::copy(cfg.begin(), cfg.end(), tmp.begin());
    const double amp = std::sqrt(double(tmp[q]) * (tmp[k] + 1));
    --tmp[q];
    ++tmp[k];
    out[basis.rank(tmp)] += amp * c[r];
  }
  return out;
}

/// rho_kq and rho_kkkk computed by streaming over configurations.
/// Warns (but proceeds) when C is not normalized to 1e-8.
inline ReducedDensities reduced_densities(const Eigen::VectorXcd& c,
                                          const FockBasis& basis) {
  const int m = basis.n_modes();
  ReducedDensities rd;
  rd.rho1 = Eigen::MatrixXcd::Zero(m, m);
  rd.rho2diag = Eigen::VectorXd::Zero(m);
  if (std::abs(c.norm() - 1.0) > 1e-8)
    std::cerr << "tdbh: reduced_densities called with ||C|| = " << c.norm()
              << " (values computed as-is)\n";
  std::vector<int> tmp(m);
  for (std::uint64_t r = 0; r < basis.size(); ++r) {
    const std::complex<double> cr = c[r];
    if (cr == std::complex<double>(0.0, 0.0)) continue;
    const auto cfg = basis.config(r);
    const double p = std::norm(cr);
    for (int k = 0; k < m; ++k) {
      rd.rho1(k, k) += p * cfg[k];
      rd.rho2diag[k] += p * cfg[k] * (cfg[k] - 1.0);
    }
    for (int q = 0; q < m; ++q) {
      if (cfg[q] == 0) continue;
      for (int k = 0; k < q; ++k) {
        // <C| b_k^dag b_q |C>: amplitude into the shifted configuration
        std::copy(cfg.begin(), cfg.end(), tmp.begin());
        const double amp = std::sqrt(double(tmp[q]) * (tmp[k] + 1));
        --tmp[q];
        ++tmp[k];
        rd.rho1(k, q) += std::conj(c[basis.rank(tmp)]) * amp * cr;
      }
    }
  }
  for (int q = 0; q < m; ++q)
    for (int k = 0; k < q; ++k) rd.rho1(q, k) = std::conj(rd.rho1(k, q));
  return rd;
}

}  // namespace tdbh
