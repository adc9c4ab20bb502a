#include "phasecrb/closed_form.hpp"

#include <cmath>
#include <string>

#include "phasecrb/errors.hpp"

namespace phasecrb {

namespace {

constexpr double kRescaleAbove = 1e150;
constexpr double kRescaleBelow = 1e-150;

/// Runs the leading-minor recurrence of H11 up to `max_len`, calling
/// visit(l, full_l, leading_l) with both determinants of size l.
template <typename Visit>
void determinant_recurrence(const ClosedFormCoefs& c, int max_len, Visit&& visit) {
  const double corner = c.b_coef * (c.a_coef + 1.0);
  const double interior = c.b_coef * c.a_coef;
  const double off2 = c.b_coef * c.b_coef;

  // Stored values are true values times exp(-log_scale).
  double log_scale = 0.0;
  double prev2 = 0.0;  // theta_{l-2}
  double prev1 = 1.0;  // theta_{l-1}
  auto to_logdet = [&](double v) {
    return LogDet{std::log(std::fabs(v)) + log_scale, v < 0.0 ? -1 : 1};
  };
  for (int l = 1; l <= max_len; ++l) {
    const double lead = l == 1 ? corner : interior * prev1 - off2 * prev2;
    const double full = l == 1 ? corner : corner * prev1 - off2 * prev2;
    visit(l, to_logdet(full), to_logdet(lead));
    prev2 = prev1;
    prev1 = lead;
    const double mag = std::fabs(prev1);
    if (mag > kRescaleAbove || (mag < kRescaleBelow && mag > 0.0)) {
      prev1 /= mag;
      prev2 /= mag;
      log_scale += std::log(mag);
    }
  }
}

double finite_or_throw(double v, const char* what) {
  if (!std::isfinite(v) || v <= 0.0) throw InconsistentResult(std::string(what) + " is not a positive finite number");
  return v;
}

void check_coefs(const ClosedFormCoefs& c) {
  detail::require(c.jd > 0.0 && c.sigma_w2 > 0.0 && c.r1 > 0.0 && c.r2 > c.r1,
                  "invalid closed-form coefficients");
}

// Bounds of a one- or two-symbol block from the 1x1 / 2x2 / 3x3 information
// matrices. With beta = 1/sigma_w2 the 2x2 H11 is [[beta+J, -beta], [-beta, beta+J]];
// its cofactors simplify to BCRB = (beta+J) / (J (2 beta + J)), and the 3x3
// HIM has |H| = beta J^2 and cofactor beta J, so HCRB = 1/J at both positions.
double small_block(const ClosedFormCoefs& c, BoundKind kind, int block_len) {
  if (block_len == 1) {
    if (kind == BoundKind::hcrb) throw InvalidInput("on-line HCRB is undefined at l = 1 (singular HIM)");
    return 1.0 / c.jd;
  }
  if (kind == BoundKind::hcrb) return 1.0 / c.jd;
  const double beta = -c.b_coef;
  return (beta + c.jd) / (c.jd * (2.0 * beta + c.jd));
}

// lambda_l = (-b) S_l / (1 + mu^l), mu = (-b)/r2, with the positive-term sum
//   S_l = sum_{k=1}^{l-1} (1 - mu^k)(1 - mu^(l-k)).
// Written as lambda = (l-1)/sigma_w2 - H12' H11^-1 H12 it loses about
// log10(r2/r1) digits to cancellation. S obeys S_{l+1} = S_l + (1 - mu) U_l
// with U_l = mu U_{l-1} + (1 - mu^l), U_1 = 1 - mu: every term is positive.
class LambdaRecurrence {
 public:
  explicit LambdaRecurrence(const ClosedFormCoefs& c)
      : beta_(-c.b_coef), log_mu_(std::log1p(-c.b_plus_r2 / c.r2)), mu_(std::exp(log_mu_)),
        one_minus_mu_(c.b_plus_r2 / c.r2), u_(one_minus_mu_) {}

  // Advances from l to l + 1.
  void step() {
    s_ += one_minus_mu_ * u_;
    ++l_;
    u_ = mu_ * u_ - std::expm1(l_ * log_mu_);
  }
  int length() const { return l_; }
  double value() const { return beta_ * s_ / (1.0 + std::exp(l_ * log_mu_)); }

 private:
  double beta_;
  double log_mu_;
  double mu_;
  double one_minus_mu_;
  double s_ = 0.0;  // S_l
  double u_;        // U_l
  int l_ = 1;
};

}  // namespace

OnlineDeterminant parse_online_determinant(std::string_view name) {
  if (name == "length") return OnlineDeterminant::length_l;
  if (name == "submatrix") return OnlineDeterminant::leading_submatrix;
  throw InvalidInput("unknown online determinant '" + std::string(name) + "' (expected length or submatrix)");
}

ClosedFormCoefs coefs(double jd, double sigma_w2) {
  detail::require(std::isfinite(jd) && jd > 0.0, "jd must be positive");
  detail::require(std::isfinite(sigma_w2) && sigma_w2 > 0.0, "sigma_w2 must be positive");
  ClosedFormCoefs c;
  c.jd = jd;
  c.sigma_w2 = sigma_w2;
  c.a_coef = -sigma_w2 * jd - 2.0;
  c.b_coef = -1.0 / sigma_w2;
  const double x = 1.0 / (jd * sigma_w2);
  const double root = std::sqrt(1.0 + 4.0 * x);
  c.r2 = 1.0 / sigma_w2 + (1.0 + root) * jd / 2.0;
  c.r1 = c.b_coef * c.b_coef / c.r2;  // smaller root without cancellation
  const double gap = jd * root;       // r2 - r1
  c.rho1 = -c.r1 / gap;
  c.rho2 = c.r2 / gap;
  c.b_plus_r1 = -2.0 / (sigma_w2 * (1.0 + root));
  c.b_plus_r2 = (1.0 + root) * jd / 2.0;
  return c;
}

double LogDet::value() const { return sign * std::exp(log_abs); }

LogDet det_b(const ClosedFormCoefs& c, int block_len) {
  check_coefs(c);
  detail::require(block_len >= 1, "determinant needs L >= 1");
  LogDet out;
  determinant_recurrence(c, block_len, [&](int l, LogDet full, LogDet) {
    if (l == block_len) out = full;
  });
  return out;
}

DeterminantSeries det_b_series(const ClosedFormCoefs& c, int max_len) {
  check_coefs(c);
  detail::require(max_len >= 1, "determinant needs L >= 1");
  DeterminantSeries s;
  s.full.reserve(static_cast<std::size_t>(max_len));
  s.leading.reserve(static_cast<std::size_t>(max_len));
  determinant_recurrence(c, max_len, [&](int, LogDet full, LogDet lead) {
    s.full.push_back(full);
    s.leading.push_back(lead);
  });
  return s;
}

OfflineBlock::OfflineBlock(const ClosedFormCoefs& c, int block_len)
    : OfflineBlock(c, block_len, det_b(c, block_len)) {}

OfflineBlock::OfflineBlock(const ClosedFormCoefs& c, int block_len, LogDet det)
    : OfflineBlock(c, block_len, det, schur_lambda(c, block_len)) {}

OfflineBlock::OfflineBlock(const ClosedFormCoefs& c, int block_len, LogDet det, double lambda)
    : c_(c), len_(block_len), lambda_(lambda) {
  check_coefs(c);
  detail::require(block_len >= 2, "off-line bounds need L >= 2");
  if (det.sign <= 0) throw InconsistentResult("|H11| must be positive");
  q_ = c.r1 / c.r2;
  p_ = c.rho1 * c.b_plus_r1 / c.r1;
  qq_ = c.rho2 * c.b_plus_r2 / c.r2;
  beta_r2_ = (-c.b_coef) / c.r2;
  scale_ = std::exp((len_ - 1) * std::log(c.r2) - det.log_abs);
}

double schur_lambda(const ClosedFormCoefs& c, int block_len) {
  check_coefs(c);
  detail::require(block_len >= 2, "lambda needs L >= 2");
  LambdaRecurrence rec(c);
  while (rec.length() < block_len) rec.step();
  return rec.value();
}

// theta_m / r2^m with theta_m = rho1 r1^(m-1) (r1 + b) + rho2 r2^(m-1) (r2 + b)
// the m-th leading minor of H11 (m < L).
double OfflineBlock::theta_norm(int m) const { return p_ * std::pow(q_, m) + qq_; }

void OfflineBlock::check_position(int l) const {
  if (l < 1 || l > len_) {
    throw InvalidInput("position " + std::to_string(l) + " outside [1, " + std::to_string(len_) + "]");
  }
}

double OfflineBlock::bcrb(int l) const {
  check_position(l);
  if (len_ == 2) return small_block(c_, BoundKind::bcrb, 2);
  if (l == 1 || l == len_) return finite_or_throw(edge_bcrb(), "BCRB");
  const int n = len_;
  const double b2 = c_.b_coef * c_.b_coef;
  const double term1 = p_ * p_ * std::pow(q_, n - 1);
  const double term2 = qq_ * qq_;
  const double cross = b2 / (c_.r1 * c_.r2) * (std::pow(q_, l - 1) + std::pow(q_, n - l)) / (c_.a_coef - 2.0);
  return finite_or_throw(scale_ * (term1 + term2 - cross), "BCRB");
}

// [H11^-1]_{LL} = theta_{L-1} / |H11| = 1 / (b(A+1) - r1 R) with
// R = theta_norm(L-2) / theta_norm(L-1) = 1 + (1/q - 1) / (1 + Q / (P q^(L-1))).
// Every step is monotone in q^(L-1), so the on-line BCRB (this value for a
// length-l block) is non-increasing in l in floating point, not just up to
// rounding.
double OfflineBlock::edge_bcrb() const {
  const double x = p_ * std::pow(q_, len_ - 1);
  const double ratio = 1.0 + (1.0 / q_ - 1.0) / (1.0 + qq_ / x);
  return 1.0 / (c_.b_coef * (c_.a_coef + 1.0) - c_.r1 * ratio);
}

std::pair<double, double> OfflineBlock::h11_inv_edge(int l) const {
  check_position(l);
  const double first = scale_ * std::pow(beta_r2_, l - 1) * theta_norm(len_ - l);
  const double last = scale_ * std::pow(beta_r2_, len_ - l) * theta_norm(l - 1);
  return {first, last};
}

double OfflineBlock::hcrb(int l) const {
  check_position(l);
  if (len_ == 2) return small_block(c_, BoundKind::hcrb, 2);
  if (!(lambda_ > 0.0)) {
    throw InconsistentResult("Schur complement lambda = " + std::to_string(lambda_) + " is not positive");
  }
  const auto [first, last] = h11_inv_edge(l);
  const double beta = -c_.b_coef;
  const double diff = first - last;
  return finite_or_throw(bcrb(l) + beta * beta * diff * diff / lambda_, "HCRB");
}

BoundValue bcrb_offline(const ClosedFormCoefs& c, int block_len, int l) {
  const OfflineBlock blk(c, block_len);
  return {blk.bcrb(l), BoundKind::bcrb, EstimationMode::offline, l, block_len};
}

BoundValue hcrb_offline(const ClosedFormCoefs& c, int block_len, int l) {
  const OfflineBlock blk(c, block_len);
  return {blk.hcrb(l), BoundKind::hcrb, EstimationMode::offline, l, block_len};
}

std::pair<double, double> h11_inv_edge(const ClosedFormCoefs& c, int block_len, int l) {
  return OfflineBlock(c, block_len).h11_inv_edge(l);
}

namespace {

// `lambda` is only read for the HCRB.
double online_value(const ClosedFormCoefs& c, BoundKind kind, int l, const LogDet& full, const LogDet& lead,
                    double lambda, OnlineDeterminant det) {
  if (l <= 2) return small_block(c, kind, l);
  const OfflineBlock blk(c, l, full, lambda);
  const double bayes = blk.bcrb(l);
  if (det == OnlineDeterminant::length_l) return kind == BoundKind::hcrb ? blk.hcrb(l) : bayes;
  const double drift = kind == BoundKind::hcrb ? blk.hcrb(l) - bayes : 0.0;
  if (lead.sign <= 0) throw InconsistentResult("leading minor of H11 must be positive");
  const double ratio = std::exp(full.log_abs - lead.log_abs);
  return bayes * ratio + drift * ratio * ratio;
}

BoundValue online(const ClosedFormCoefs& c, BoundKind kind, int l, OnlineDeterminant det) {
  check_coefs(c);
  detail::require(l >= (kind == BoundKind::hcrb ? 2 : 1),
                  kind == BoundKind::hcrb ? "on-line HCRB needs l >= 2" : "on-line BCRB needs l >= 1");
  LogDet full, lead;
  if (l > 2) {
    determinant_recurrence(c, l, [&](int k, LogDet f, LogDet d) {
      if (k == l) {
        full = f;
        lead = d;
      }
    });
  }
  const double lambda = kind == BoundKind::hcrb && l > 2 ? schur_lambda(c, l) : 0.0;
  return {online_value(c, kind, l, full, lead, lambda, det), kind, EstimationMode::online, l, l};
}

}  // namespace

BoundValue bcrb_online(const ClosedFormCoefs& c, int l, OnlineDeterminant det) {
  return online(c, BoundKind::bcrb, l, det);
}

BoundValue hcrb_online(const ClosedFormCoefs& c, int l, OnlineDeterminant det) {
  return online(c, BoundKind::hcrb, l, det);
}

BoundValue evaluate_bound(const ClosedFormCoefs& c, BoundKind kind, EstimationMode mode, int block_len, int l,
                          OnlineDeterminant det) {
  if (mode == EstimationMode::online) return online(c, kind, l, det);
  return kind == BoundKind::bcrb ? bcrb_offline(c, block_len, l) : hcrb_offline(c, block_len, l);
}

std::vector<std::pair<int, double>> bound_curve(const ClosedFormCoefs& c, BoundKind kind, EstimationMode mode,
                                                int block_len, OnlineDeterminant det) {
  check_coefs(c);
  std::vector<std::pair<int, double>> out;
  out.reserve(static_cast<std::size_t>(block_len));
  if (mode == EstimationMode::offline) {
    const OfflineBlock blk(c, block_len);
    for (int l = 1; l <= block_len; ++l) {
      out.emplace_back(l, kind == BoundKind::bcrb ? blk.bcrb(l) : blk.hcrb(l));
    }
    return out;
  }
  detail::require(block_len >= 1, "block length must be at least 1");
  LambdaRecurrence rec(c);
  determinant_recurrence(c, block_len, [&](int l, LogDet full, LogDet lead) {
    if (kind == BoundKind::hcrb && l < 2) return;
    while (rec.length() < l) rec.step();
    out.emplace_back(l, online_value(c, kind, l, full, lead, rec.value(), det));
  });
  return out;
}

}  // namespace phasecrb
