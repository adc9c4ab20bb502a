#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "phasecrb/closed_form.hpp"
#include "phasecrb/fisher.hpp"
#include "phasecrb/model.hpp"

namespace phasecrb {

enum class SweepAxis { position, snr_db };

struct BoundSpec {
  BoundKind kind = BoundKind::hcrb;
  EstimationMode mode = EstimationMode::offline;
};

/// One sweep experiment. Defaults: sigma_w2 = 0.005, xi = 0.03, SNR = 2 dB,
/// L = 60.
struct SweepSpec {
  SweepAxis axis = SweepAxis::position;
  PhaseModel pm;  // scenario is taken from `scenarios`
  std::vector<ConstellationLabel> constellations{ConstellationLabel::qam16};
  std::vector<Scenario> scenarios{Scenario::da};
  std::vector<BoundSpec> bounds{BoundSpec{}};
  std::vector<double> snr_grid;  // dB; SNR axis only
  int position = 30;             // SNR axis only
  MonteCarloOptions mc;
  OnlineDeterminant online_det = OnlineDeterminant::length_l;

  void validate() const;
};

struct BoundSeries {
  std::string label;  // CONSTELLATION/SCENARIO/KIND/mode
  ConstellationLabel constellation = ConstellationLabel::qam16;
  Scenario scenario = Scenario::da;
  BoundSpec bound;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<FisherEstimate> jd_used;  // aligned with x
};

std::string series_label(ConstellationLabel c, Scenario s, BoundSpec b);

/// Memoizes J_D per (constellation, scenario, snr_db, n_samples, seed, theta0).
/// Thread-safe.
class FisherCache {
 public:
  FisherEstimate get(const PhaseModel& pm, ConstellationLabel label, const MonteCarloOptions& mc);
  std::size_t size() const;

 private:
  using Key = std::tuple<ConstellationLabel, Scenario, double, std::uint64_t, std::uint64_t, double>;
  mutable std::mutex mu_;
  std::map<Key, FisherEstimate> entries_;
};

/// Bound against block position l = 1..L (on-line HCRB from l = 2).
std::vector<BoundSeries> sweep_position(const SweepSpec& spec, FisherCache* cache = nullptr);

/// Bound at a fixed position against SNR.
std::vector<BoundSeries> sweep_snr(const SweepSpec& spec, FisherCache* cache = nullptr);

std::vector<BoundSeries> run_sweep(const SweepSpec& spec, FisherCache* cache = nullptr);

/// lo, lo+step, ... up to hi (inclusive within step/1e6).
std::vector<double> make_snr_grid(double lo, double hi, double step);

/// Highest SNR at which nda.y / da.y >= factor, linearly interpolated in
/// ln(ratio) towards the next grid point. nullopt if the ratio never reaches
/// the factor. Both series must share x.
std::optional<double> threshold_snr(const BoundSeries& da, const BoundSeries& nda, double factor);

struct OracleCheck {
  double max_rel_error = 0.0;
  std::size_t points = 0;
};

/// Re-evaluates up to `per_series` grid points of every series by dense
/// inversion (points chosen by a seeded draw) and reports the worst
/// relative error.
OracleCheck cross_check(const SweepSpec& spec, const std::vector<BoundSeries>& series, std::size_t per_series = 10,
                        std::uint64_t seed = 1);

struct GridCheckRow {
  BoundSpec bound;
  std::size_t cases = 0;
  double max_rel_error = 0.0;
};

/// Closed form vs dense inversion over jd in {0.5, 2, 20}, sigma_w2 in
/// {0.005, 0.1}, L in {2, 3, 5, 10, 30, 60} and every position, for all four
/// (kind, mode) pairs.
std::vector<GridCheckRow> oracle_equivalence_grid();

}  // namespace phasecrb
