#pragma once

#include <vector>

#include <Eigen/Dense>

#include "phasecrb/model.hpp"

namespace phasecrb {

/// Symmetric tridiagonal matrix; only the diagonal and the sub-diagonal are stored.
struct SymTridiagonal {
  std::vector<double> diag;
  std::vector<double> sub;  // sub[i] couples rows i and i+1

  int size() const { return static_cast<int>(diag.size()); }
  Eigen::MatrixXd dense() const;
};

/// Blocks of the hybrid information matrix for (theta_1..theta_L, xi).
///
/// H11 = b * tridiag(1, [A+1, A, ..., A, A+1], 1), with A = -sigma_w2*J_D - 2
/// and b = -1/sigma_w2. H12 has two nonzeros, +1/sigma_w2 at the first index
/// and -1/sigma_w2 at the last; H22 = (L-1)/sigma_w2.
struct HimBlocks {
  double a_coef = 0.0;
  double b_coef = 0.0;
  int block_len = 0;
  double jd = 0.0;
  double sigma_w2 = 0.0;
  double h12_first = 0.0;
  double h12_last = 0.0;
  double h22 = 0.0;

  SymTridiagonal h11() const;
  /// Full (L+1)x(L+1) HIM assembled from the lower triangle.
  Eigen::MatrixXd dense() const;
};

inline constexpr int kOracleMaxLength = 2000;

HimBlocks build_him(double jd, double sigma_w2, int block_len);

/// Bayesian information matrix B_L: equal to H11 for L >= 2, [J_D] for L = 1.
SymTridiagonal build_bim(double jd, double sigma_w2, int block_len);

/// First L diagonal entries of H^{-1} by dense pivoted LU.
std::vector<double> oracle_hcrb_diag(const HimBlocks& blocks);

/// Diagonal of B_L^{-1} by dense pivoted LU.
std::vector<double> oracle_bcrb_diag(const SymTridiagonal& bim);

/// One bound by brute force: off-line uses the length-L matrix at position l;
/// on-line uses the length-l matrix at its last position.
double oracle_bound(double jd, double sigma_w2, BoundKind kind, EstimationMode mode, int block_len, int l);

/// Dense inverse with a reciprocal-condition check; throws SingularMatrix.
Eigen::MatrixXd oracle_inverse(const Eigen::MatrixXd& m);

}  // namespace phasecrb
