#include "phasecrb/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "phasecrb/errors.hpp"

namespace phasecrb {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

int grid_side(ConstellationLabel label) {
  switch (label) {
    case ConstellationLabel::qam4: return 2;
    case ConstellationLabel::qam16: return 4;
    case ConstellationLabel::qam64: return 8;
    case ConstellationLabel::qam256: return 16;
    case ConstellationLabel::bpsk: break;
  }
  return 0;
}

}  // namespace

std::string_view to_string(ConstellationLabel label) {
  switch (label) {
    case ConstellationLabel::bpsk: return "BPSK";
    case ConstellationLabel::qam4: return "QAM4";
    case ConstellationLabel::qam16: return "QAM16";
    case ConstellationLabel::qam64: return "QAM64";
    case ConstellationLabel::qam256: return "QAM256";
  }
  return "?";
}

std::string_view to_string(Scenario scenario) {
  return scenario == Scenario::da ? "DA" : "NDA";
}

std::string_view to_string(BoundKind kind) { return kind == BoundKind::bcrb ? "BCRB" : "HCRB"; }

std::string_view to_string(EstimationMode mode) {
  return mode == EstimationMode::online ? "online" : "offline";
}

BoundKind parse_bound_kind(std::string_view name) {
  const auto n = lower(name);
  if (n == "bcrb") return BoundKind::bcrb;
  if (n == "hcrb") return BoundKind::hcrb;
  throw InvalidInput("unknown bound kind '" + std::string(name) + "' (expected bcrb or hcrb)");
}

EstimationMode parse_mode(std::string_view name) {
  const auto n = lower(name);
  if (n == "online" || n == "on-line") return EstimationMode::online;
  if (n == "offline" || n == "off-line") return EstimationMode::offline;
  throw InvalidInput("unknown mode '" + std::string(name) + "' (expected online or offline)");
}

ConstellationLabel parse_constellation(std::string_view name) {
  const auto n = lower(name);
  if (n == "bpsk") return ConstellationLabel::bpsk;
  if (n == "qam4" || n == "qpsk" || n == "4qam") return ConstellationLabel::qam4;
  if (n == "qam16" || n == "16qam") return ConstellationLabel::qam16;
  if (n == "qam64" || n == "64qam") return ConstellationLabel::qam64;
  if (n == "qam256" || n == "256qam") return ConstellationLabel::qam256;
  throw InvalidInput("unsupported constellation '" + std::string(name) + "'");
}

Scenario parse_scenario(std::string_view name) {
  const auto n = lower(name);
  if (n == "da") return Scenario::da;
  if (n == "nda") return Scenario::nda;
  throw InvalidInput("unknown scenario '" + std::string(name) + "' (expected da or nda)");
}

Constellation::Constellation(ConstellationLabel label) : label_(label) {
  if (label == ConstellationLabel::bpsk) {
    points_ = {{-1.0, 0.0}, {1.0, 0.0}};
    return;
  }
  const int side = grid_side(label);
  if (side == 0) throw InvalidInput("unsupported constellation label");
  // Mean energy of the odd-integer grid {±1, ±3, ...}^2 is 2(side^2 - 1)/3.
  const double scale = 1.0 / std::sqrt(2.0 * (side * side - 1) / 3.0);
  points_.reserve(static_cast<std::size_t>(side * side));
  for (int row = 0; row < side; ++row) {
    const double im = 2 * row - (side - 1);
    for (int col = 0; col < side; ++col) {
      const double re = 2 * col - (side - 1);
      points_.emplace_back(re * scale, im * scale);
    }
  }
}

double Constellation::mean_energy() const {
  double sum = 0.0;
  for (const auto& p : points_) sum += std::norm(p);
  return sum / static_cast<double>(points_.size());
}

Constellation build_constellation(ConstellationLabel label) { return Constellation(label); }

void PhaseModel::validate() const {
  detail::require(std::isfinite(snr_db), "snr_db must be finite");
  detail::require(std::isfinite(sigma_w2) && sigma_w2 > 0.0, "sigma_w2 must be positive");
  detail::require(std::isfinite(xi), "xi must be finite");
  detail::require(block_len >= 1, "block length must be at least 1");
}

double noise_variance_from_snr_db(double snr_db) {
  detail::require(std::isfinite(snr_db), "snr_db must be finite");
  return std::pow(10.0, -snr_db / 10.0);
}

double noise_variance(const PhaseModel& pm) { return noise_variance_from_snr_db(pm.snr_db); }

}  // namespace phasecrb
