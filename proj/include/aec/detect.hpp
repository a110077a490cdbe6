#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "aec/aec_rate.hpp"
#include "aec/ingest.hpp"
#include "json.hpp"

namespace aec {

/// Ten-minute acquisition cadence of the IMS tests.
inline constexpr double kSamplesPerDay = 144.0;

struct DetectorConfig {
  double theta = 0.9;
  std::size_t lag = 100;
  std::size_t warmup = 0;

  void validate() const;
};

/// Direction in which an indicator moves when the machine degrades.
enum class Trend { falling, rising };

struct DetectionReport {
  std::optional<std::size_t> degradation_start;
  std::vector<bool> flags;
  DetectorConfig config;
  Trend trend = Trend::falling;
  std::string series_id;
};

/// Falling trend: t is abnormal iff t >= max(warmup, lag) and
/// series[t] < theta * series[t - lag]. Rising trend uses
/// series[t] > (2 - theta) * series[t - lag]. Throws ConfigError if N <= lag.
DetectionReport detect_degradation(const Eigen::VectorXd& series, const DetectorConfig& config,
                                   Trend trend = Trend::falling, std::string series_id = {});

/// Re-evaluates the rule for every flag and the reported start point.
bool detection_consistent(const Eigen::VectorXd& series, const DetectionReport& report);

/// 1 - |predicted - reference| / n_samples.
double prediction_accuracy(std::size_t predicted, std::size_t reference, std::size_t n_samples);

std::size_t days_to_ordinals(double days, double samples_per_day = kSamplesPerDay);

double rms(const Eigen::Ref<const Eigen::VectorXd>& x);
/// m4 / m2^2 with 1/L central moments (3 for a Gaussian). Throws
/// NumericalError for a constant sample.
double kurtosis(const Eigen::Ref<const Eigen::VectorXd>& x);

Eigen::VectorXd rms_series(const SampleCatalog& catalog);
Eigen::VectorXd kurtosis_series(const SampleCatalog& catalog);

enum class Baseline { rms, kurtosis };

std::string to_string(Baseline baseline);

/// Baseline indicator passed through the same normalization and filter as
/// the health rate. Use Trend::rising when detecting on it.
AecSeries baseline_rate(const SampleCatalog& catalog, Baseline baseline, const AecOptions& options);

nlohmann::json to_json(const DetectorConfig& config);
DetectorConfig detector_config_from_json(const nlohmann::json& j, DetectorConfig base = {});

/// series_id, degradation_start (null when absent), theta, lag, warmup and
/// the flags as [start, length] runs of abnormal samples.
nlohmann::json to_json(const DetectionReport& report);
DetectionReport detection_from_json(const nlohmann::json& j);

}  // namespace aec
