#include "aec/detect.hpp"

#include <cmath>

#include "aec/error.hpp"

namespace aec {

namespace {

bool abnormal(double current, double earlier, double theta, Trend trend) {
  return trend == Trend::falling ? current < theta * earlier : current > (2.0 - theta) * earlier;
}

}  // namespace

void DetectorConfig::validate() const {
  if (!(theta > 0.0 && theta < 1.0)) throw ConfigError("theta must lie in (0, 1)");
  if (lag < 1) throw ConfigError("lag must be >= 1");
}

DetectionReport detect_degradation(const Eigen::VectorXd& series, const DetectorConfig& config,
                                   Trend trend, std::string series_id) {
  config.validate();
  const auto n = static_cast<std::size_t>(series.size());
  if (n <= config.lag) {
    throw ConfigError("series of length " + std::to_string(n) + " is not longer than lag " +
                      std::to_string(config.lag));
  }
  DetectionReport report;
  report.config = config;
  report.trend = trend;
  report.series_id = std::move(series_id);
  report.flags.assign(n, false);
  const std::size_t first = std::max(config.warmup, config.lag);
  for (std::size_t t = first; t < n; ++t) {
    const auto i = static_cast<Eigen::Index>(t);
    const auto j = static_cast<Eigen::Index>(t - config.lag);
    if (abnormal(series(i), series(j), config.theta, trend)) {
      report.flags[t] = true;
      if (!report.degradation_start) report.degradation_start = t;
    }
  }
  return report;
}

bool detection_consistent(const Eigen::VectorXd& series, const DetectionReport& report) {
  const auto& cfg = report.config;
  if (report.flags.size() != static_cast<std::size_t>(series.size())) return false;
  std::optional<std::size_t> first;
  for (std::size_t t = 0; t < report.flags.size(); ++t) {
    bool expected = false;
    if (t >= cfg.warmup && t >= cfg.lag) {
      expected = abnormal(series(static_cast<Eigen::Index>(t)),
                          series(static_cast<Eigen::Index>(t - cfg.lag)), cfg.theta, report.trend);
    }
    if (expected != report.flags[t]) return false;
    if (expected && !first) first = t;
  }
  return first == report.degradation_start;
}

double prediction_accuracy(std::size_t predicted, std::size_t reference, std::size_t n_samples) {
  if (n_samples == 0) throw ConfigError("prediction accuracy needs n_samples > 0");
  if (predicted >= n_samples || reference >= n_samples) {
    throw ConfigError("predicted and reference ordinals must be below n_samples");
  }
  const double diff = predicted > reference ? static_cast<double>(predicted - reference)
                                            : static_cast<double>(reference - predicted);
  return 1.0 - diff / static_cast<double>(n_samples);
}

std::size_t days_to_ordinals(double days, double samples_per_day) {
  if (!(days >= 0.0) || !(samples_per_day > 0.0)) throw ConfigError("invalid day conversion");
  return static_cast<std::size_t>(std::llround(days * samples_per_day));
}

double rms(const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() == 0) throw DimensionError("rms of an empty sample");
  return std::sqrt(x.squaredNorm() / static_cast<double>(x.size()));
}

double kurtosis(const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() == 0) throw DimensionError("kurtosis of an empty sample");
  const Eigen::ArrayXd c = x.array() - x.mean();
  const double n = static_cast<double>(x.size());
  const Eigen::ArrayXd c2 = c.square();
  const double m2 = c2.sum() / n;
  const double m4 = c2.square().sum() / n;
  if (!(m2 > 0.0)) throw NumericalError("kurtosis of a constant sample");
  return m4 / (m2 * m2);
}

Eigen::VectorXd rms_series(const SampleCatalog& catalog) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(catalog.size()));
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = rms(catalog.samples[i].values);
  }
  return out;
}

Eigen::VectorXd kurtosis_series(const SampleCatalog& catalog) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(catalog.size()));
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    try {
      out(static_cast<Eigen::Index>(i)) = kurtosis(catalog.samples[i].values);
    } catch (const NumericalError&) {
      throw NumericalError("sample " + std::to_string(i) + " is constant; kurtosis undefined");
    }
  }
  return out;
}

std::string to_string(Baseline baseline) {
  return baseline == Baseline::rms ? "rms" : "kurtosis";
}

AecSeries baseline_rate(const SampleCatalog& catalog, Baseline baseline,
                        const AecOptions& options) {
  const Eigen::VectorXd raw =
      baseline == Baseline::rms ? rms_series(catalog) : kurtosis_series(catalog);
  return rate_from_series(raw, options);
}

nlohmann::json to_json(const DetectorConfig& c) {
  return {{"theta", c.theta}, {"lag", c.lag}, {"warmup", c.warmup}};
}

DetectorConfig detector_config_from_json(const nlohmann::json& j, DetectorConfig c) {
  c.theta = j.value("theta", c.theta);
  c.lag = j.value("lag", c.lag);
  c.warmup = j.value("warmup", c.warmup);
  return c;
}

nlohmann::json to_json(const DetectionReport& r) {
  nlohmann::json runs = nlohmann::json::array();
  for (std::size_t t = 0; t < r.flags.size();) {
    if (!r.flags[t]) {
      ++t;
      continue;
    }
    std::size_t end = t;
    while (end < r.flags.size() && r.flags[end]) ++end;
    runs.push_back({t, end - t});
    t = end;
  }
  nlohmann::json j{{"series_id", r.series_id},
                   {"theta", r.config.theta},
                   {"lag", r.config.lag},
                   {"warmup", r.config.warmup},
                   {"trend", r.trend == Trend::falling ? "falling" : "rising"},
                   {"N", r.flags.size()},
                   {"flag_runs", std::move(runs)}};
  j["degradation_start"] =
      r.degradation_start ? nlohmann::json(*r.degradation_start) : nlohmann::json(nullptr);
  return j;
}

DetectionReport detection_from_json(const nlohmann::json& j) {
  DetectionReport r;
  r.series_id = j.value("series_id", "");
  r.config = detector_config_from_json(j);
  r.trend = j.value("trend", "falling") == "rising" ? Trend::rising : Trend::falling;
  r.flags.assign(j.at("N").get<std::size_t>(), false);
  for (const auto& run : j.at("flag_runs")) {
    const auto start = run.at(0).get<std::size_t>();
    const auto len = run.at(1).get<std::size_t>();
    if (start + len > r.flags.size()) throw IoError("flag run exceeds series length");
    for (std::size_t t = start; t < start + len; ++t) r.flags[t] = true;
  }
  const auto& start = j.at("degradation_start");
  if (!start.is_null()) r.degradation_start = start.get<std::size_t>();
  return r;
}

}  // namespace aec
