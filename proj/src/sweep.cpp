#include "phasecrb/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "phasecrb/errors.hpp"
#include "phasecrb/info_matrix.hpp"

namespace phasecrb {

namespace {

FisherEstimate fisher_for(const PhaseModel& pm, ConstellationLabel label, const MonteCarloOptions& mc,
                          FisherCache* cache) {
  if (cache != nullptr) return cache->get(pm, label, mc);
  return fisher(pm, Constellation(label), mc);
}

// Non-finite errors map to +inf so std::max cannot drop them.
double rel_error(double value, double reference) {
  const double e = std::fabs(value - reference) / std::fabs(reference);
  return std::isnan(e) ? HUGE_VAL : e;
}

}  // namespace

void SweepSpec::validate() const {
  PhaseModel probe = pm;
  probe.validate();
  detail::require(!constellations.empty(), "sweep needs at least one constellation");
  detail::require(!scenarios.empty(), "sweep needs at least one scenario");
  detail::require(!bounds.empty(), "sweep needs at least one bound");
  if (axis == SweepAxis::snr_db) {
    detail::require(!snr_grid.empty(), "SNR sweep needs a non-empty grid");
    for (double v : snr_grid) detail::require(std::isfinite(v), "SNR grid values must be finite");
    detail::require(position >= 1 && position <= pm.block_len, "position must lie within the block");
    for (const auto& b : bounds) {
      if (b.mode == EstimationMode::online && b.kind == BoundKind::hcrb) {
        detail::require(position >= 2, "on-line HCRB needs position >= 2");
      }
    }
  }
  for (const auto& b : bounds) {
    if (b.mode == EstimationMode::offline) detail::require(pm.block_len >= 2, "off-line bounds need L >= 2");
  }
  if (std::find(scenarios.begin(), scenarios.end(), Scenario::nda) != scenarios.end()) {
    detail::require(mc.n_samples >= kMinSamples, "n_samples below the Monte Carlo floor of 1000");
  }
}

std::string series_label(ConstellationLabel c, Scenario s, BoundSpec b) {
  std::string out(to_string(c));
  out += '/';
  out += to_string(s);
  out += '/';
  out += to_string(b.kind);
  out += '/';
  out += to_string(b.mode);
  return out;
}

FisherEstimate FisherCache::get(const PhaseModel& pm, ConstellationLabel label, const MonteCarloOptions& mc) {
  const bool nda = pm.scenario == Scenario::nda;
  const Key key{nda ? label : ConstellationLabel::bpsk, pm.scenario, pm.snr_db, nda ? mc.n_samples : 0,
                nda ? mc.seed : 0, nda ? mc.theta0 : 0.0};
  {
    std::lock_guard lock(mu_);
    if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  }
  const auto est = fisher(pm, Constellation(label), mc);
  std::lock_guard lock(mu_);
  entries_.emplace(key, est);
  return est;
}

std::size_t FisherCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

std::vector<BoundSeries> sweep_position(const SweepSpec& spec, FisherCache* cache) {
  detail::require(spec.axis == SweepAxis::position, "sweep_position needs the position axis");
  spec.validate();
  std::vector<BoundSeries> out;
  for (auto label : spec.constellations) {
    for (auto scenario : spec.scenarios) {
      PhaseModel pm = spec.pm;
      pm.scenario = scenario;
      const auto jd = fisher_for(pm, label, spec.mc, cache);
      const auto cf = coefs(jd.jd, pm.sigma_w2);
      for (const auto& b : spec.bounds) {
        BoundSeries s;
        s.label = series_label(label, scenario, b);
        s.constellation = label;
        s.scenario = scenario;
        s.bound = b;
        for (const auto& [l, v] : bound_curve(cf, b.kind, b.mode, pm.block_len, spec.online_det)) {
          s.x.push_back(l);
          s.y.push_back(v);
        }
        s.jd_used.assign(s.x.size(), jd);
        out.push_back(std::move(s));
      }
    }
  }
  return out;
}

std::vector<BoundSeries> sweep_snr(const SweepSpec& spec, FisherCache* cache) {
  detail::require(spec.axis == SweepAxis::snr_db, "sweep_snr needs the snr axis");
  spec.validate();
  std::vector<BoundSeries> out;
  for (auto label : spec.constellations) {
    for (auto scenario : spec.scenarios) {
      std::vector<BoundSeries> group;
      for (const auto& b : spec.bounds) {
        BoundSeries s;
        s.label = series_label(label, scenario, b);
        s.constellation = label;
        s.scenario = scenario;
        s.bound = b;
        group.push_back(std::move(s));
      }
      for (double snr : spec.snr_grid) {
        PhaseModel pm = spec.pm;
        pm.scenario = scenario;
        pm.snr_db = snr;
        const auto jd = fisher_for(pm, label, spec.mc, cache);
        const auto cf = coefs(jd.jd, pm.sigma_w2);
        for (auto& s : group) {
          const auto v = evaluate_bound(cf, s.bound.kind, s.bound.mode, pm.block_len, spec.position, spec.online_det);
          s.x.push_back(snr);
          s.y.push_back(v.value);
          s.jd_used.push_back(jd);
        }
      }
      for (auto& s : group) out.push_back(std::move(s));
    }
  }
  return out;
}

std::vector<BoundSeries> run_sweep(const SweepSpec& spec, FisherCache* cache) {
  return spec.axis == SweepAxis::position ? sweep_position(spec, cache) : sweep_snr(spec, cache);
}

std::vector<double> make_snr_grid(double lo, double hi, double step) {
  detail::require(std::isfinite(lo) && std::isfinite(hi) && std::isfinite(step), "SNR grid bounds must be finite");
  detail::require(step > 0.0, "SNR step must be positive");
  detail::require(hi >= lo, "SNR grid upper end below lower end");
  std::vector<double> grid;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-6));
  for (long i = 0; i <= n; ++i) grid.push_back(lo + static_cast<double>(i) * step);
  return grid;
}

std::optional<double> threshold_snr(const BoundSeries& da, const BoundSeries& nda, double factor) {
  detail::require(da.x == nda.x, "threshold_snr needs series on the same grid");
  detail::require(factor > 1.0, "threshold factor must exceed 1");
  const std::size_t n = da.x.size();
  for (std::size_t k = n; k-- > 0;) {
    const double ratio = nda.y[k] / da.y[k];
    if (ratio < factor) continue;
    if (k + 1 == n) return da.x[k];
    const double lr0 = std::log(ratio);
    const double lr1 = std::log(nda.y[k + 1] / da.y[k + 1]);
    const double t = (lr0 - std::log(factor)) / (lr0 - lr1);
    return da.x[k] + t * (da.x[k + 1] - da.x[k]);
  }
  return std::nullopt;
}

OracleCheck cross_check(const SweepSpec& spec, const std::vector<BoundSeries>& series, std::size_t per_series,
                        std::uint64_t seed) {
  OracleCheck out;
  std::mt19937_64 pick(seed);
  for (const auto& s : series) {
    std::vector<std::size_t> idx(s.x.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), pick);
    idx.resize(std::min(per_series, idx.size()));
    std::sort(idx.begin(), idx.end());
    for (auto i : idx) {
      const int l = spec.axis == SweepAxis::position ? static_cast<int>(s.x[i]) : spec.position;
      if (spec.online_det != OnlineDeterminant::length_l && s.bound.mode == EstimationMode::online && l >= 3) {
        continue;  // the diagnostic determinant variant has no oracle
      }
      const double ref =
          oracle_bound(s.jd_used[i].jd, spec.pm.sigma_w2, s.bound.kind, s.bound.mode, spec.pm.block_len, l);
      out.max_rel_error = std::max(out.max_rel_error, rel_error(s.y[i], ref));
      ++out.points;
    }
  }
  return out;
}

std::vector<GridCheckRow> oracle_equivalence_grid() {
  std::vector<GridCheckRow> rows;
  for (auto kind : {BoundKind::bcrb, BoundKind::hcrb}) {
    for (auto mode : {EstimationMode::offline, EstimationMode::online}) rows.push_back({{kind, mode}, 0, 0.0});
  }
  auto row = [&](BoundKind k, EstimationMode m) -> GridCheckRow& {
    return rows[(k == BoundKind::bcrb ? 0 : 2) + (m == EstimationMode::offline ? 0 : 1)];
  };
  for (double jd : {0.5, 2.0, 20.0}) {
    for (double sw : {0.005, 0.1}) {
      const auto cf = coefs(jd, sw);
      for (int len : {2, 3, 5, 10, 30, 60}) {
        const OfflineBlock blk(cf, len);
        const auto bayes = oracle_bcrb_diag(build_bim(jd, sw, len));
        const auto hybrid = oracle_hcrb_diag(build_him(jd, sw, len));
        for (int l = 1; l <= len; ++l) {
          const auto i = static_cast<std::size_t>(l - 1);
          auto& rb = row(BoundKind::bcrb, EstimationMode::offline);
          rb.max_rel_error = std::max(rb.max_rel_error, rel_error(blk.bcrb(l), bayes[i]));
          ++rb.cases;
          auto& rh = row(BoundKind::hcrb, EstimationMode::offline);
          rh.max_rel_error = std::max(rh.max_rel_error, rel_error(blk.hcrb(l), hybrid[i]));
          ++rh.cases;
        }
      }
      // On-line bound at l is the last diagonal entry of the length-l inverse.
      for (int l = 1; l <= 60; ++l) {
        const auto b = oracle_bound(jd, sw, BoundKind::bcrb, EstimationMode::online, l, l);
        auto& ob = row(BoundKind::bcrb, EstimationMode::online);
        ob.max_rel_error = std::max(ob.max_rel_error, rel_error(bcrb_online(cf, l).value, b));
        ++ob.cases;
        if (l < 2) continue;
        const auto h = oracle_bound(jd, sw, BoundKind::hcrb, EstimationMode::online, l, l);
        auto& oh = row(BoundKind::hcrb, EstimationMode::online);
        oh.max_rel_error = std::max(oh.max_rel_error, rel_error(hcrb_online(cf, l).value, h));
        ++oh.cases;
      }
    }
  }
  return rows;
}

}  // namespace phasecrb
