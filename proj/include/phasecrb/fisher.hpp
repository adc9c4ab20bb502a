#pragma once

#include <complex>
#include <cstdint>

#include "phasecrb/model.hpp"

namespace phasecrb {

/// Per-symbol Fisher information J_D and its Monte Carlo provenance.
struct FisherEstimate {
  double jd = 0.0;         // rad^-2
  double std_error = 0.0;  // 0 for DA
  std::uint64_t n_samples = 0;
  Scenario scenario = Scenario::da;
  std::uint64_t seed = 0;  // meaningful only for NDA
};

inline constexpr std::uint64_t kDefaultSamples = 1'000'000;
inline constexpr std::uint64_t kMinSamples = 1'000;
inline constexpr std::uint64_t kDefaultSeed = 20090614;

/// Data-aided J_D = 2/sigma_n^2. Requires pm.scenario == DA.
FisherEstimate fisher_da(const PhaseModel& pm);

/// d^2/dtheta^2 of ln p(y | theta) for the symbol-marginalized likelihood
/// (uniform prior over the constellation). Weights are exponent-shifted so the
/// ratios stay finite at high SNR.
double nda_curvature(std::complex<double> y, double theta, const Constellation& c, double sigma_n2);

struct MonteCarloOptions {
  std::uint64_t n_samples = kDefaultSamples;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 0;  // 0: hardware concurrency
  double theta0 = 0.0;   // true phase used to synthesize observations
};

/// Non-data-aided J_D by Monte Carlo: mean of -nda_curvature over
/// y = s e^{j theta0} + n. Deterministic in (seed, n_samples) whatever the
/// thread count.
FisherEstimate fisher_nda_mc(const PhaseModel& pm, const Constellation& c, const MonteCarloOptions& opts);

/// Dispatches on pm.scenario; `c` and `opts` are ignored for DA.
FisherEstimate fisher(const PhaseModel& pm, const Constellation& c, const MonteCarloOptions& opts);

}  // namespace phasecrb
