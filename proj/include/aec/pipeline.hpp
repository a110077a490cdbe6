#pragma once

// End-to-end runs: ingest (or generate) a catalog, train the autoencoder,
// encode, compute the health rate, detect, and write the results.
//
// Two frameworks:
//   monitor  train on every sample; retrospective health trend.
//   online   train on the first floor(train_fraction * N) samples, encode
//            everything with the frozen network, and normalize with bounds
//            fitted on the training portion only.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "aec/aec_rate.hpp"
#include "aec/autoencoder.hpp"
#include "aec/detect.hpp"
#include "aec/ingest.hpp"
#include "aec/scg.hpp"
#include "json.hpp"

namespace aec {

inline constexpr const char* kDatasetEnvVar = "AEC_DATASET_ROOT";

enum class Framework { monitor, online };

std::string to_string(Framework framework);
Framework framework_from_string(const std::string& text);

struct RunConfig {
  // Source: a directory of IMS records, or the generator when `synthetic` is set.
  std::filesystem::path dataset_root;
  std::optional<SynthConfig> synthetic;
  std::string bearing_id = "S2B1";
  std::optional<std::size_t> channel;  // overrides the bearing/sensor mapping
  int sensor = 1;
  std::size_t expected_rows = kImsRecordRows;
  std::string timestamp_format = kImsTimestampFormat;
  std::size_t decimation = 1;

  ScalingMode scaling = ScalingMode::global_minmax;
  AEConfig ae{0, 1000};  // input_dim is taken from the catalog
  TrainConfig train;
  AecOptions aec;
  DetectorConfig detector;

  Framework framework = Framework::monitor;
  double train_fraction = 0.7;
  std::optional<std::size_t> reference_ordinal;
  std::filesystem::path out_dir = "aec_out";
  std::uint64_t seed = 0;

  /// Checks field ranges and the framework / train_fraction pairing.
  void validate() const;
};

/// Decimation 16, 64 hidden units, 150 epochs. A CI-speed setting, far below
/// the 20480-input / 1000-unit scale of the full method.
RunConfig desk_preset(RunConfig base = {});

nlohmann::json to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::json& j, RunConfig base = {});
/// Reads a config file. A provenance.json is accepted too (its "config" block is used).
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});

struct RunResult {
  AecSeries series;
  DetectionReport detection;
  TrainReport train;
  AEParams params;
  AEConfig ae_config;
  std::size_t n_samples = 0;
  std::size_t n_train = 0;
  std::optional<std::size_t> reference_ordinal;
  std::optional<double> accuracy;
  nlohmann::json catalog;
  nlohmann::json provenance;
};

/// Loads or generates the unscaled catalog described by `config`, with
/// decimation applied. Falls back to $AEC_DATASET_ROOT for the dataset root.
SampleCatalog resolve_catalog(const RunConfig& config);

RunResult run_monitor(const RunConfig& config);
RunResult run_monitor(const RunConfig& config, const SampleCatalog& catalog,
                      const ProgressFn& progress = {});
RunResult run_online(const RunConfig& config);
RunResult run_online(const RunConfig& config, const SampleCatalog& catalog,
                     const ProgressFn& progress = {});
/// Dispatches on config.framework.
RunResult run(const RunConfig& config);
RunResult run(const RunConfig& config, const SampleCatalog& catalog,
              const ProgressFn& progress = {});

/// Writes aec_series.csv, detection.json, train_report.json, provenance.json
/// and plot_data.csv into `out_dir`; returns the written paths.
std::vector<std::filesystem::path> emit_outputs(const RunResult& result,
                                                const std::filesystem::path& out_dir);

std::string plot_data_csv(const RunResult& result);

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

void write_text_file(const std::filesystem::path& path, const std::string& text);
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace aec
