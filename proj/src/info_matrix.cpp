#include "phasecrb/info_matrix.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "phasecrb/errors.hpp"

namespace phasecrb {

namespace {

void check_inputs(double jd, double sigma_w2) {
  detail::require(std::isfinite(jd) && jd > 0.0, "jd must be positive");
  detail::require(std::isfinite(sigma_w2) && sigma_w2 > 0.0, "sigma_w2 must be positive");
}

SymTridiagonal assemble_h11(double a_coef, double b_coef, int len) {
  SymTridiagonal m;
  m.diag.assign(static_cast<std::size_t>(len), b_coef * a_coef);
  m.diag.front() = b_coef * (a_coef + 1.0);
  m.diag.back() = b_coef * (a_coef + 1.0);
  m.sub.assign(static_cast<std::size_t>(len - 1), b_coef);
  return m;
}

}  // namespace

Eigen::MatrixXd SymTridiagonal::dense() const {
  const int n = size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = diag[static_cast<std::size_t>(i)];
  for (int i = 0; i + 1 < n; ++i) {
    m(i + 1, i) = sub[static_cast<std::size_t>(i)];
    m(i, i + 1) = m(i + 1, i);
  }
  return m;
}

SymTridiagonal HimBlocks::h11() const { return assemble_h11(a_coef, b_coef, block_len); }

Eigen::MatrixXd HimBlocks::dense() const {
  const int n = block_len;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n + 1, n + 1);
  m.topLeftCorner(n, n) = h11().dense();
  m(n, 0) = h12_first;
  m(n, n - 1) = h12_last;
  m(n, n) = h22;
  m.topRightCorner(n, 1) = m.bottomLeftCorner(1, n).transpose();
  return m;
}

HimBlocks build_him(double jd, double sigma_w2, int block_len) {
  check_inputs(jd, sigma_w2);
  detail::require(block_len >= 2, "the hybrid information matrix needs L >= 2");
  HimBlocks h;
  h.a_coef = -sigma_w2 * jd - 2.0;
  h.b_coef = -1.0 / sigma_w2;
  h.block_len = block_len;
  h.jd = jd;
  h.sigma_w2 = sigma_w2;
  h.h12_first = 1.0 / sigma_w2;
  h.h12_last = -1.0 / sigma_w2;
  h.h22 = (block_len - 1) / sigma_w2;
  return h;
}

SymTridiagonal build_bim(double jd, double sigma_w2, int block_len) {
  check_inputs(jd, sigma_w2);
  detail::require(block_len >= 1, "block length must be at least 1");
  if (block_len == 1) return SymTridiagonal{{jd}, {}};
  return build_him(jd, sigma_w2, block_len).h11();
}

Eigen::MatrixXd oracle_inverse(const Eigen::MatrixXd& m) {
  detail::require(m.rows() == m.cols() && m.rows() > 0, "oracle_inverse: square non-empty matrix required");
  detail::require(m.rows() <= kOracleMaxLength + 1, "oracle is capped at L <= 2000");
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  const double rcond = lu.rcond();
  if (!(rcond > 64.0 * std::numeric_limits<double>::epsilon())) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", rcond);
    throw SingularMatrix(std::string("information matrix is numerically singular (rcond ~ ") + buf + ")");
  }
  return lu.inverse();
}

std::vector<double> oracle_hcrb_diag(const HimBlocks& blocks) {
  const Eigen::MatrixXd inv = oracle_inverse(blocks.dense());
  std::vector<double> out(static_cast<std::size_t>(blocks.block_len));
  for (int i = 0; i < blocks.block_len; ++i) out[static_cast<std::size_t>(i)] = inv(i, i);
  return out;
}

std::vector<double> oracle_bcrb_diag(const SymTridiagonal& bim) {
  const Eigen::MatrixXd inv = oracle_inverse(bim.dense());
  std::vector<double> out(static_cast<std::size_t>(bim.size()));
  for (int i = 0; i < bim.size(); ++i) out[static_cast<std::size_t>(i)] = inv(i, i);
  return out;
}

double oracle_bound(double jd, double sigma_w2, BoundKind kind, EstimationMode mode, int block_len, int l) {
  const int len = mode == EstimationMode::online ? l : block_len;
  detail::require(l >= 1 && l <= len, "position outside the block");
  if (kind == BoundKind::bcrb) return oracle_bcrb_diag(build_bim(jd, sigma_w2, len))[static_cast<std::size_t>(l - 1)];
  return oracle_hcrb_diag(build_him(jd, sigma_w2, len))[static_cast<std::size_t>(l - 1)];
}

}  // namespace phasecrb
