#include <cmath>
#include <numbers>
#include <random>

#include "aec/error.hpp"
#include "aec/ingest.hpp"

namespace aec {

SampleCatalog synth_run_to_failure(const SynthConfig& cfg) {
  if (cfg.change_point == 0 || cfg.change_point >= cfg.n_samples) {
    throw ConfigError("change_point must satisfy 0 < change_point < n_samples");
  }
  if (cfg.sample_len < 8) throw ConfigError("sample_len must be at least 8");
  if (!(cfg.noise_pole >= 0.0 && cfg.noise_pole < 1.0)) {
    throw ConfigError("noise_pole must lie in [0, 1)");
  }

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double innovation = cfg.noise_std * std::sqrt(1.0 - cfg.noise_pole * cfg.noise_pole);
  const double shaft_w = 2.0 * std::numbers::pi * cfg.shaft_hz / cfg.sample_rate;
  const double fault_w = 2.0 * std::numbers::pi * cfg.fault_hz / cfg.sample_rate;

  SampleCatalog catalog;
  catalog.bearing_id = "SYNTH";
  catalog.channel = 0;
  catalog.change_point = cfg.change_point;
  catalog.samples.reserve(cfg.n_samples);

  const auto len = static_cast<Eigen::Index>(cfg.sample_len);
  for (std::size_t t = 0; t < cfg.n_samples; ++t) {
    const double fault_amp =
        t >= cfg.change_point ? cfg.severity_growth * static_cast<double>(t - cfg.change_point)
                              : 0.0;
    Sample s;
    s.values.resize(len);
    // Start the AR(1) chain in its stationary distribution.
    double noise = cfg.noise_std * gauss(rng);
    for (Eigen::Index i = 0; i < len; ++i) {
      if (i > 0) noise = cfg.noise_pole * noise + innovation * gauss(rng);
      const double k = static_cast<double>(i);
      s.values(i) = cfg.shaft_amplitude * std::sin(shaft_w * k) +
                    fault_amp * std::sin(fault_w * k) + noise;
    }
    s.meta.ordinal = t;
    s.meta.timestamp = std::chrono::sys_seconds{std::chrono::seconds{
        cfg.start_epoch_seconds + static_cast<std::int64_t>(t) * cfg.cadence_seconds}};
    s.meta.source_name = format_timestamp(s.meta.timestamp);
    catalog.samples.push_back(std::move(s));
  }
  return catalog;
}

SampleCatalog synth_run_to_failure(std::size_t n_samples, std::size_t sample_len,
                                   std::size_t change_point, double severity_growth,
                                   std::uint64_t seed) {
  SynthConfig cfg;
  cfg.n_samples = n_samples;
  cfg.sample_len = sample_len;
  cfg.change_point = change_point;
  cfg.severity_growth = severity_growth;
  cfg.seed = seed;
  return synth_run_to_failure(cfg);
}

}  // namespace aec
