#pragma once

#include <complex>
#include <string>
#include <string_view>
#include <vector>

namespace phasecrb {

enum class ConstellationLabel { bpsk, qam4, qam16, qam64, qam256 };
enum class Scenario { da, nda };
enum class BoundKind { bcrb, hcrb };
enum class EstimationMode { online, offline };

std::string_view to_string(ConstellationLabel label);
std::string_view to_string(Scenario scenario);
std::string_view to_string(BoundKind kind);
std::string_view to_string(EstimationMode mode);
/// Case-insensitive; throws InvalidInput on unknown names.
ConstellationLabel parse_constellation(std::string_view name);
Scenario parse_scenario(std::string_view name);
BoundKind parse_bound_kind(std::string_view name);
EstimationMode parse_mode(std::string_view name);

/// Unit-average-energy symbol alphabet with a uniform prior.
///
/// Point order is fixed: BPSK is {-1, +1}; square QAM is row-major over the
/// odd-integer grid, imaginary part outer (ascending), real part inner
/// (ascending), then scaled to unit mean energy.
class Constellation {
 public:
  explicit Constellation(ConstellationLabel label);

  ConstellationLabel label() const { return label_; }
  std::size_t order() const { return points_.size(); }
  const std::vector<std::complex<double>>& points() const { return points_; }
  double mean_energy() const;

 private:
  ConstellationLabel label_;
  std::vector<std::complex<double>> points_;
};

Constellation build_constellation(ConstellationLabel label);

/// Scalar parameters of the Wiener-plus-drift phase problem. The symbol
/// energy is normalized to one, so SNR = 1/sigma_n^2.
struct PhaseModel {
  double snr_db = 2.0;
  double sigma_w2 = 0.005;  // rad^2, phase increment variance
  double xi = 0.03;         // rad/symbol, linear drift; enters no bound
  int block_len = 60;
  Scenario scenario = Scenario::da;

  /// Throws InvalidInput unless sigma_w2 > 0, block_len >= 1 and snr_db finite.
  void validate() const;
};

/// sigma_n^2 = 10^(-snr_db/10).
double noise_variance(const PhaseModel& pm);
double noise_variance_from_snr_db(double snr_db);

}  // namespace phasecrb
