#pragma once

#include <utility>
#include <vector>

#include "phasecrb/model.hpp"

namespace phasecrb {

/// Which determinant replaces |H11| in the on-line formulas.
///   length_l           the information matrix of a length-l block (both
///                      corner entries A+1); agrees with the dense oracle.
///   leading_submatrix  the literal upper-left l x l block of a longer H11
///                      (last diagonal entry A instead of A+1). Diagnostic.
enum class OnlineDeterminant { length_l, leading_submatrix };

OnlineDeterminant parse_online_determinant(std::string_view name);

/// Scalars shared by every closed-form bound: A, b, the roots r1 < r2 of
/// r^2 - (bA) r + b^2 = 0, and the weights rho1 + rho2 = 1.
struct ClosedFormCoefs {
  double r1 = 0.0;
  double r2 = 0.0;
  double rho1 = 0.0;
  double rho2 = 0.0;
  double a_coef = 0.0;
  double b_coef = 0.0;
  double jd = 0.0;
  double sigma_w2 = 0.0;
  double b_plus_r1 = 0.0;  // cancellation-free b + r1
  double b_plus_r2 = 0.0;
};

ClosedFormCoefs coefs(double jd, double sigma_w2);

/// Determinant in sign / log-magnitude form.
struct LogDet {
  double log_abs = 0.0;
  int sign = 1;
  double value() const;
};

/// |H11| (= |B_L|) of length L by the three-term recurrence with rescaling.
/// L = 1 yields the corner entry b(A+1).
LogDet det_b(const ClosedFormCoefs& c, int block_len);

/// |B_l| and the leading l x l minor of a longer H11, for l = 1..max_len
/// (index l-1), in a single O(max_len) pass.
struct DeterminantSeries {
  std::vector<LogDet> full;
  std::vector<LogDet> leading;
};
DeterminantSeries det_b_series(const ClosedFormCoefs& c, int max_len);

struct BoundValue {
  double value = 0.0;  // rad^2
  BoundKind kind = BoundKind::bcrb;
  EstimationMode mode = EstimationMode::offline;
  int position = 1;
  int block_len = 1;
};

/// Off-line bounds of one block. Construction costs one O(L) determinant;
/// every per-position query afterwards is O(1). No matrix is formed.
class OfflineBlock {
 public:
  OfflineBlock(const ClosedFormCoefs& c, int block_len);
  OfflineBlock(const ClosedFormCoefs& c, int block_len, LogDet det);
  /// With a precomputed Schur complement (see schur_lambda).
  OfflineBlock(const ClosedFormCoefs& c, int block_len, LogDet det, double lambda);

  int block_len() const { return len_; }
  double bcrb(int l) const;
  double hcrb(int l) const;
  /// ([H11^-1]_{l,1}, [H11^-1]_{l,L}).
  std::pair<double, double> h11_inv_edge(int l) const;
  /// Schur complement of H11 in the HIM (scalar, positive).
  double lambda() const { return lambda_; }

 private:
  double theta_norm(int m) const;
  double edge_bcrb() const;
  void check_position(int l) const;

  ClosedFormCoefs c_;
  int len_;
  double q_;        // r1 / r2
  double p_;        // rho1 (b + r1) / r1
  double qq_;       // rho2 (b + r2) / r2
  double beta_r2_;  // (-b) / r2
  double scale_;    // r2^(L-1) / |H11|
  double lambda_;
};

/// Schur complement of H11 in the HIM of a length-L block, by an O(L) positive-term recurrence.
double schur_lambda(const ClosedFormCoefs& c, int block_len);

BoundValue bcrb_offline(const ClosedFormCoefs& c, int block_len, int l);
BoundValue hcrb_offline(const ClosedFormCoefs& c, int block_len, int l);
BoundValue bcrb_online(const ClosedFormCoefs& c, int l,
                       OnlineDeterminant det = OnlineDeterminant::length_l);
BoundValue hcrb_online(const ClosedFormCoefs& c, int l,
                       OnlineDeterminant det = OnlineDeterminant::length_l);
std::pair<double, double> h11_inv_edge(const ClosedFormCoefs& c, int block_len, int l);

/// Dispatch on (kind, mode). For online, `block_len` is ignored.
BoundValue evaluate_bound(const ClosedFormCoefs& c, BoundKind kind, EstimationMode mode, int block_len,
                          int l, OnlineDeterminant det = OnlineDeterminant::length_l);

/// Bound at every position 1..block_len in O(block_len) total. Online HCRB
/// starts at l = 2 (the single-observation HIM is singular); the returned
/// pairs are (position, value).
std::vector<std::pair<int, double>> bound_curve(const ClosedFormCoefs& c, BoundKind kind,
                                                EstimationMode mode, int block_len,
                                                OnlineDeterminant det = OnlineDeterminant::length_l);

}  // namespace phasecrb
