#include "phasecrb/cli.hpp"

#include <cstdlib>
#include <exception>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "phasecrb/closed_form.hpp"
#include "phasecrb/errors.hpp"
#include "phasecrb/fisher.hpp"
#include "phasecrb/info_matrix.hpp"
#include "phasecrb/output.hpp"
#include "phasecrb/sweep.hpp"

namespace phasecrb::cli {

namespace {

using nlohmann::json;

/// Every flag, with the documented defaults.
struct RunConfig {
  std::vector<std::string> modulations{"qam16"};
  std::vector<std::string> scenarios{"da"};
  std::vector<std::string> kinds{"hcrb"};
  std::vector<std::string> modes{"offline"};
  double snr_db = 2.0;
  double sigma_w2 = 0.005;
  double xi = 0.03;
  int length = 60;
  int position = 30;
  std::uint64_t samples = kDefaultSamples;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 0;
  double snr_min = 0.0;
  double snr_max = 40.0;
  double snr_step = 2.0;
  double threshold_factor = 1.5;
  std::string online_det = "length";
  std::string format = "csv";
  std::string output = "-";
  std::string dump_him;
  bool oracle = false;
};

std::uint64_t default_seed() {
  if (const char* env = std::getenv(kSeedEnvVar); env != nullptr && *env != '\0') {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used, 0);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw InvalidInput(std::string(kSeedEnvVar) + " is not an unsigned integer");
  }
  return kDefaultSeed;
}

template <typename T, typename Parse>
std::vector<T> parse_all(const std::vector<std::string>& names, Parse parse) {
  std::vector<T> out;
  for (const auto& n : names) out.push_back(parse(n));
  return out;
}

json meta_for(const std::string& command, const RunConfig& cfg) {
  return {{"schema", kSchemaVersion},
          {"command", command},
          {"modulation", cfg.modulations},
          {"scenario", cfg.scenarios},
          {"kind", cfg.kinds},
          {"mode", cfg.modes},
          {"snr_db", cfg.snr_db},
          {"sigma_w2", cfg.sigma_w2},
          {"xi", cfg.xi},
          {"length", cfg.length},
          {"position", cfg.position},
          {"samples", cfg.samples},
          {"seed", cfg.seed},
          {"threads", cfg.threads},
          {"snr_min", cfg.snr_min},
          {"snr_max", cfg.snr_max},
          {"snr_step", cfg.snr_step},
          {"threshold_factor", cfg.threshold_factor},
          {"online_det", cfg.online_det},
          {"oracle", cfg.oracle},
          {"format", cfg.format}};
}

void emit(const RunConfig& cfg, const std::string& content, std::ostream& out) {
  if (cfg.output == "-") {
    out << content;
    out.flush();
  } else {
    write_atomically(cfg.output, content);
  }
}

std::string render(const RunConfig& cfg, const json& meta, const std::vector<BoundSeries>& series,
                   const std::vector<json>& extra_per_series = {}) {
  if (cfg.format == "csv") return to_csv(series);
  json doc{{"meta", meta}, {"series", to_json(series)}};
  for (std::size_t i = 0; i < extra_per_series.size() && i < series.size(); ++i) {
    doc["series"][i].update(extra_per_series[i]);
  }
  return doc.dump(2) + "\n";
}

PhaseModel model_from(const RunConfig& cfg) {
  PhaseModel pm;
  pm.snr_db = cfg.snr_db;
  pm.sigma_w2 = cfg.sigma_w2;
  pm.xi = cfg.xi;
  pm.block_len = cfg.length;
  pm.validate();
  return pm;
}

MonteCarloOptions mc_from(const RunConfig& cfg) {
  MonteCarloOptions mc;
  mc.n_samples = cfg.samples;
  mc.seed = cfg.seed;
  mc.threads = cfg.threads;
  return mc;
}

int cmd_jd(const RunConfig& cfg, std::ostream& out) {
  PhaseModel pm = model_from(cfg);
  std::vector<BoundSeries> rows;
  for (auto label : parse_all<ConstellationLabel>(cfg.modulations, parse_constellation)) {
    for (auto scenario : parse_all<Scenario>(cfg.scenarios, parse_scenario)) {
      pm.scenario = scenario;
      const auto est = fisher(pm, Constellation(label), mc_from(cfg));
      BoundSeries s;
      s.label = std::string(to_string(label)) + "/" + std::string(to_string(scenario)) + "/JD";
      s.constellation = label;
      s.scenario = scenario;
      s.x = {cfg.snr_db};
      s.y = {est.jd};
      s.jd_used = {est};
      rows.push_back(std::move(s));
    }
  }
  emit(cfg, render(cfg, meta_for("jd", cfg), rows), out);
  return kOk;
}

std::string him_csv(const HimBlocks& h) {
  std::string s = "block,row,col,value\n";
  auto row = [&](const char* block, int r, int c, double v) {
    s += block;
    s += ',' + std::to_string(r) + ',' + std::to_string(c) + ',' + format_double(v) + '\n';
  };
  const auto h11 = h.h11();
  for (int i = 0; i < h11.size(); ++i) {
    if (i > 0) row("H11", i + 1, i, h11.sub[static_cast<std::size_t>(i - 1)]);
    row("H11", i + 1, i + 1, h11.diag[static_cast<std::size_t>(i)]);
  }
  row("H12", 1, 1, h.h12_first);
  row("H12", h.block_len, 1, h.h12_last);
  row("H22", 1, 1, h.h22);
  return s;
}

int cmd_bound(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  detail::require(cfg.modulations.size() == 1 && cfg.scenarios.size() == 1 && cfg.kinds.size() == 1 &&
                      cfg.modes.size() == 1,
                  "bound takes exactly one modulation, scenario, kind and mode");
  PhaseModel pm = model_from(cfg);
  pm.scenario = parse_scenario(cfg.scenarios.front());
  const auto label = parse_constellation(cfg.modulations.front());
  const BoundSpec spec{parse_bound_kind(cfg.kinds.front()), parse_mode(cfg.modes.front())};
  const auto det = parse_online_determinant(cfg.online_det);
  if (spec.mode == EstimationMode::offline) {
    detail::require(cfg.position >= 1 && cfg.position <= cfg.length, "position must lie within [1, length]");
  }

  const auto est = fisher(pm, Constellation(label), mc_from(cfg));
  const auto cf = coefs(est.jd, pm.sigma_w2);
  const auto value = evaluate_bound(cf, spec.kind, spec.mode, pm.block_len, cfg.position, det);

  BoundSeries s;
  s.label = series_label(label, pm.scenario, spec);
  s.constellation = label;
  s.scenario = pm.scenario;
  s.bound = spec;
  s.x = {static_cast<double>(cfg.position)};
  s.y = {value.value};
  s.jd_used = {est};
  std::vector<BoundSeries> rows{s};

  json meta = meta_for("bound", cfg);
  json extra = json::object();
  if (det == OnlineDeterminant::leading_submatrix && spec.mode == EstimationMode::online) {
    const auto ref = evaluate_bound(cf, spec.kind, spec.mode, pm.block_len, cfg.position);
    const double gap = (value.value - ref.value) / ref.value;
    meta["online_det_discrepancy"] = gap;
    err << "note: leading-submatrix determinant differs from the length-l bound by a relative "
        << format_double(gap) << "\n";
  }
  if (!cfg.dump_him.empty()) {
    const int len = spec.mode == EstimationMode::online ? cfg.position : pm.block_len;
    write_atomically(cfg.dump_him, him_csv(build_him(est.jd, pm.sigma_w2, len)));
  }
  int status = kOk;
  if (cfg.oracle) {
    const double ref = oracle_bound(est.jd, pm.sigma_w2, spec.kind, spec.mode, pm.block_len, cfg.position);
    const double rel = std::fabs(value.value - ref) / ref;
    extra = {{"oracle", ref}, {"rel_error", rel}};
    BoundSeries o = s;
    o.label += "/oracle";
    o.y = {ref};
    rows.push_back(o);
    err << "oracle relative error " << format_double(rel) << "\n";
    if (det == OnlineDeterminant::length_l && !(rel <= kOracleTolerance)) status = kOracleMismatch;
  }
  if (cfg.format == "csv") {
    emit(cfg, to_csv(rows), out);
  } else {
    emit(cfg, render(cfg, meta, {s}, {extra}), out);
  }
  return status;
}

SweepSpec sweep_spec_from(const RunConfig& cfg, SweepAxis axis) {
  SweepSpec spec;
  spec.axis = axis;
  spec.pm = model_from(cfg);
  spec.constellations = parse_all<ConstellationLabel>(cfg.modulations, parse_constellation);
  spec.scenarios = parse_all<Scenario>(cfg.scenarios, parse_scenario);
  spec.bounds.clear();
  for (auto k : parse_all<BoundKind>(cfg.kinds, parse_bound_kind)) {
    for (auto m : parse_all<EstimationMode>(cfg.modes, parse_mode)) spec.bounds.push_back({k, m});
  }
  spec.position = cfg.position;
  spec.mc = mc_from(cfg);
  spec.online_det = parse_online_determinant(cfg.online_det);
  if (axis == SweepAxis::snr_db) spec.snr_grid = make_snr_grid(cfg.snr_min, cfg.snr_max, cfg.snr_step);
  spec.validate();
  return spec;
}

int cmd_sweep(const RunConfig& cfg, SweepAxis axis, std::ostream& out, std::ostream& err) {
  const auto spec = sweep_spec_from(cfg, axis);
  FisherCache cache;
  const auto series = run_sweep(spec, &cache);
  json meta = meta_for(axis == SweepAxis::position ? "sweep-position" : "sweep-snr", cfg);

  if (axis == SweepAxis::snr_db) {
    json thresholds = json::array();
    for (const auto& nda : series) {
      if (nda.scenario != Scenario::nda) continue;
      for (const auto& da : series) {
        if (da.scenario != Scenario::da || da.constellation != nda.constellation || da.bound.kind != nda.bound.kind ||
            da.bound.mode != nda.bound.mode) {
          continue;
        }
        const auto t = threshold_snr(da, nda, cfg.threshold_factor);
        thresholds.push_back({{"da", da.label},
                              {"nda", nda.label},
                              {"factor", cfg.threshold_factor},
                              {"snr_db", t ? json(*t) : json(nullptr)}});
        err << "threshold " << nda.label << " / " << da.label << " at factor " << format_double(cfg.threshold_factor)
            << ": " << (t ? format_double(*t) + " dB" : std::string("not reached")) << "\n";
      }
    }
    meta["thresholds"] = thresholds;
  }

  int status = kOk;
  if (cfg.oracle) {
    const auto check = cross_check(spec, series, 10, cfg.seed);
    meta["oracle_check"] = {{"max_rel_error", check.max_rel_error}, {"points", check.points}};
    err << "oracle cross-check: " << check.points << " points, max relative error "
        << format_double(check.max_rel_error) << "\n";
    if (!(check.max_rel_error <= kOracleTolerance)) status = kOracleMismatch;
  }
  emit(cfg, render(cfg, meta, series), out);
  return status;
}

int cmd_check(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto rows = oracle_equivalence_grid();
  double worst = 0.0;
  for (const auto& r : rows) worst = std::max(worst, r.max_rel_error);
  std::string content;
  if (cfg.format == "csv") {
    content = "label,cases,max_rel_error\n";
    for (const auto& r : rows) {
      content += std::string(to_string(r.bound.kind)) + "/" + std::string(to_string(r.bound.mode)) + "," +
                 std::to_string(r.cases) + "," + format_double(r.max_rel_error) + "\n";
    }
  } else {
    json checks = json::array();
    for (const auto& r : rows) {
      checks.push_back({{"label", std::string(to_string(r.bound.kind)) + "/" + std::string(to_string(r.bound.mode))},
                        {"cases", r.cases},
                        {"max_rel_error", r.max_rel_error}});
    }
    json doc{{"meta", meta_for("check", cfg)},
             {"checks", checks},
             {"max_rel_error", worst},
             {"tolerance", kOracleTolerance}};
    content = doc.dump(2) + "\n";
  }
  emit(cfg, content, out);
  err << "check: max relative error " << format_double(worst) << " (tolerance " << format_double(kOracleTolerance)
      << ")\n";
  return worst <= kOracleTolerance ? kOk : kOracleMismatch;
}

void add_model_flags(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--modulation", cfg.modulations, "bpsk|qam4|qam16|qam64|qam256 (repeatable)")->capture_default_str();
  sub->add_option("--scenario", cfg.scenarios, "da|nda (repeatable)")->capture_default_str();
  sub->add_option("--snr-db", cfg.snr_db, "signal-to-noise ratio in dB")->capture_default_str();
  sub->add_option("--sigma-w2", cfg.sigma_w2, "phase-noise increment variance (rad^2)")->capture_default_str();
  sub->add_option("--xi", cfg.xi, "linear drift (rad/symbol); echoed only, bounds do not depend on it")
      ->capture_default_str();
  sub->add_option("--length", cfg.length, "block length L")->capture_default_str();
  sub->add_option("--samples", cfg.samples, "Monte Carlo samples for NDA J_D")->capture_default_str();
  sub->add_option("--seed", cfg.seed, std::string("Monte Carlo seed (default from ") + kSeedEnvVar + ")");
  sub->add_option("--threads", cfg.threads, "worker threads, 0 = all cores")->capture_default_str();
  sub->add_option("--format", cfg.format, "csv|json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  sub->add_option("--output", cfg.output, "output path, - for stdout")->capture_default_str();
}

void add_bound_flags(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--kind", cfg.kinds, "bcrb|hcrb (repeatable for sweeps)")->capture_default_str();
  sub->add_option("--mode", cfg.modes, "online|offline (repeatable for sweeps)")->capture_default_str();
  sub->add_option("--online-det", cfg.online_det, "length|submatrix determinant in on-line bounds")
      ->check(CLI::IsMember({"length", "submatrix"}))
      ->capture_default_str();
  sub->add_flag("--oracle", cfg.oracle, "cross-check against dense matrix inversion");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg.seed = default_seed();
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kBadFlags;
  }

  CLI::App app{"Bayesian and hybrid Cramer-Rao bounds for dynamical carrier phase estimation", "phasecrb"};
  app.require_subcommand(1);

  auto* jd = app.add_subcommand("jd", "per-symbol Fisher information J_D");
  add_model_flags(jd, cfg);

  auto* bound = app.add_subcommand("bound", "one bound value");
  add_model_flags(bound, cfg);
  add_bound_flags(bound, cfg);
  bound->add_option("--position", cfg.position, "position l in the block")->capture_default_str();
  bound->add_option("--dump-him", cfg.dump_him, "write the HIM blocks as CSV to this path");

  auto* sweep_pos = app.add_subcommand("sweep-position", "bounds against block position");
  add_model_flags(sweep_pos, cfg);
  add_bound_flags(sweep_pos, cfg);

  auto* sweep_snr = app.add_subcommand("sweep-snr", "bounds at a fixed position against SNR");
  add_model_flags(sweep_snr, cfg);
  add_bound_flags(sweep_snr, cfg);
  sweep_snr->add_option("--position", cfg.position, "position l in the block")->capture_default_str();
  sweep_snr->add_option("--snr-min", cfg.snr_min, "first grid SNR (dB)")->capture_default_str();
  sweep_snr->add_option("--snr-max", cfg.snr_max, "last grid SNR (dB)")->capture_default_str();
  sweep_snr->add_option("--snr-step", cfg.snr_step, "grid step (dB)")->capture_default_str();
  sweep_snr->add_option("--threshold-factor", cfg.threshold_factor, "NDA/DA ratio defining the threshold SNR")
      ->capture_default_str();

  auto* check = app.add_subcommand("check", "closed form vs dense inversion over the reference grid");
  check->add_option("--format", cfg.format, "csv|json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  check->add_option("--output", cfg.output, "output path, - for stdout")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kBadFlags;
  }

  for (auto* sub : {jd, bound, sweep_pos, sweep_snr}) {
    if (sub->parsed() && sub->count("--xi") > 0) {
      err << "note: --xi is recorded in the metadata only; the bounds do not depend on the drift value\n";
    }
  }

  try {
    if (jd->parsed()) return cmd_jd(cfg, out);
    if (bound->parsed()) return cmd_bound(cfg, out, err);
    if (sweep_pos->parsed()) return cmd_sweep(cfg, SweepAxis::position, out, err);
    if (sweep_snr->parsed()) return cmd_sweep(cfg, SweepAxis::snr_db, out, err);
    if (check->parsed()) return cmd_check(cfg, out, err);
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kBadFlags;
  } catch (const SingularMatrix& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const InconsistentResult& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kBadFlags;
}

}  // namespace phasecrb::cli
