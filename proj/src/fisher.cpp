#include "phasecrb/fisher.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <thread>
#include <vector>

#include "phasecrb/counter_rng.hpp"
#include "phasecrb/errors.hpp"

namespace phasecrb {

namespace {

constexpr std::size_t kMaxOrder = 256;
constexpr std::uint64_t kBlockSize = 4096;
constexpr std::uint32_t kNoiseStream = 0;
constexpr std::uint32_t kSymbolStream = 1;

/// Curvature evaluator with the constellation preprocessed once.
class CurvatureKernel {
 public:
  CurvatureKernel(const Constellation& c, double sigma_n2) : inv_s2_(1.0 / sigma_n2) {
    for (const auto& s : c.points()) {
      conj_.push_back(std::conj(s));
      energy_.push_back(std::norm(s));
    }
  }

  /// `y_derot` is y e^{-j theta}.
  double operator()(std::complex<double> y_derot) const {
    const std::size_t m = conj_.size();
    std::array<double, kMaxOrder> expo;
    std::array<double, kMaxOrder> re;
    std::array<double, kMaxOrder> im;
    double emax = -HUGE_VAL;
    for (std::size_t i = 0; i < m; ++i) {
      const auto z = y_derot * conj_[i];
      re[i] = z.real();
      im[i] = z.imag();
      expo[i] = (2.0 * re[i] - energy_[i]) * inv_s2_;
      emax = std::max(emax, expo[i]);
    }
    double sw = 0.0, sw_d1 = 0.0, sw_d2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double w = std::exp(expo[i] - emax);
      const double d1 = 2.0 * im[i] * inv_s2_;
      sw += w;
      sw_d1 += w * d1;
      sw_d2 += w * (d1 * d1 - 2.0 * re[i] * inv_s2_);
    }
    const double first = sw_d1 / sw;
    return sw_d2 / sw - first * first;
  }

 private:
  double inv_s2_;
  std::vector<std::complex<double>> conj_;
  std::vector<double> energy_;
};

struct BlockStats {
  std::uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;  // sum of squared deviations
};

// Chan et al. pairwise merge; applied in block order so the result does not
// depend on which thread produced which block.
void merge(BlockStats& acc, const BlockStats& b) {
  if (b.count == 0) return;
  const double n = static_cast<double>(acc.count + b.count);
  const double delta = b.mean - acc.mean;
  acc.mean += delta * static_cast<double>(b.count) / n;
  acc.m2 += b.m2 + delta * delta * static_cast<double>(acc.count) * static_cast<double>(b.count) / n;
  acc.count += b.count;
}

}  // namespace

FisherEstimate fisher_da(const PhaseModel& pm) {
  pm.validate();
  detail::require(pm.scenario == Scenario::da, "fisher_da requires the DA scenario");
  FisherEstimate out;
  out.jd = 2.0 / noise_variance(pm);
  out.scenario = Scenario::da;
  return out;
}

double nda_curvature(std::complex<double> y, double theta, const Constellation& c, double sigma_n2) {
  detail::require(std::isfinite(y.real()) && std::isfinite(y.imag()) && std::isfinite(theta),
                  "nda_curvature: non-finite input");
  detail::require(std::isfinite(sigma_n2) && sigma_n2 > 0.0, "nda_curvature: sigma_n2 must be positive");
  const CurvatureKernel kernel(c, sigma_n2);
  return kernel(y * std::polar(1.0, -theta));
}

FisherEstimate fisher_nda_mc(const PhaseModel& pm, const Constellation& c, const MonteCarloOptions& opts) {
  pm.validate();
  detail::require(pm.scenario == Scenario::nda, "fisher_nda_mc requires the NDA scenario");
  detail::require(opts.n_samples >= kMinSamples, "n_samples below the Monte Carlo floor of 1000");
  detail::require(std::isfinite(opts.theta0), "theta0 must be finite");

  const double sigma_n2 = noise_variance(pm);
  const double noise_scale = std::sqrt(sigma_n2 / 2.0);
  const CurvatureKernel kernel(c, sigma_n2);
  const CounterStream rng(opts.seed);
  const auto& pts = c.points();
  const auto order = static_cast<std::uint32_t>(pts.size());
  const auto rot = std::polar(1.0, opts.theta0);
  const auto derot = std::conj(rot);

  const std::uint64_t n = opts.n_samples;
  const std::uint64_t n_blocks = (n + kBlockSize - 1) / kBlockSize;
  std::vector<BlockStats> blocks(n_blocks);

  auto run_block = [&](std::uint64_t b) {
    const std::uint64_t begin = b * kBlockSize;
    const std::uint64_t end = std::min(n, begin + kBlockSize);
    std::vector<double> values;
    values.reserve(end - begin);
    double sum = 0.0;
    for (std::uint64_t i = begin; i < end; ++i) {
      const auto s = pts[rng.index_below(i, kSymbolStream, order)];
      const auto g = rng.normal_pair(i, kNoiseStream);
      const std::complex<double> y = s * rot + std::complex<double>(noise_scale * g[0], noise_scale * g[1]);
      const double v = -kernel(y * derot);
      values.push_back(v);
      sum += v;
    }
    BlockStats st;
    st.count = end - begin;
    st.mean = sum / static_cast<double>(st.count);
    for (double v : values) st.m2 += (v - st.mean) * (v - st.mean);
    blocks[b] = st;
  };

  unsigned threads = opts.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : opts.threads;
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, n_blocks));
  if (threads <= 1) {
    for (std::uint64_t b = 0; b < n_blocks; ++b) run_block(b);
  } else {
    std::atomic<std::uint64_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::uint64_t b = next++; b < n_blocks; b = next++) run_block(b);
      });
    }
  }

  BlockStats total;
  for (const auto& b : blocks) merge(total, b);

  FisherEstimate out;
  out.jd = total.mean;
  out.std_error = total.count > 1
                      ? std::sqrt(total.m2 / static_cast<double>(total.count - 1) / static_cast<double>(total.count))
                      : 0.0;
  out.n_samples = total.count;
  out.scenario = Scenario::nda;
  out.seed = opts.seed;
  if (!(out.jd > 0.0)) throw InconsistentResult("Monte Carlo J_D is not positive");
  return out;
}

FisherEstimate fisher(const PhaseModel& pm, const Constellation& c, const MonteCarloOptions& opts) {
  return pm.scenario == Scenario::da ? fisher_da(pm) : fisher_nda_mc(pm, c, opts);
}

}  // namespace phasecrb
