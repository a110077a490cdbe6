#pragma once

// Reading IMS-style run-to-failure records into per-bearing sample catalogs.
//
// An IMS record is an ASCII file holding one second of accelerometer data:
// one line per time point, one whitespace-separated column per channel. The
// filename is the acquisition timestamp ("2003.10.22.12.06.24").

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"

namespace aec {

inline constexpr std::size_t kImsRecordRows = 20480;
inline constexpr const char* kImsTimestampFormat = "%Y.%m.%d.%H.%M.%S";

struct RawRecord {
  Eigen::MatrixXd values;  // rows = time points, cols = channels

  std::size_t row_count() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t channel_count() const { return static_cast<std::size_t>(values.cols()); }
};

struct NamedRecord {
  std::string name;
  RawRecord record;
};

enum class ScalingMode { none, global_minmax, per_sample_minmax };

std::string to_string(ScalingMode mode);
ScalingMode scaling_mode_from_string(std::string_view text);

struct ScalingInfo {
  ScalingMode mode = ScalingMode::none;
  double min = 0.0;
  double max = 0.0;
  // Number of leading samples the bounds were fitted on (0 when mode is none).
  std::size_t fit_count = 0;
};

struct SampleMeta {
  std::chrono::sys_seconds timestamp{};
  std::size_t ordinal = 0;
  std::string source_name;
};

struct Sample {
  SampleMeta meta;
  Eigen::VectorXd values;
};

struct SampleCatalog {
  std::vector<Sample> samples;
  std::string bearing_id;
  std::size_t channel = 0;
  ScalingInfo scaling;
  std::size_t decimation = 1;
  // Ground truth for generated catalogs.
  std::optional<std::size_t> change_point;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  std::size_t sample_length() const {
    return samples.empty() ? 0 : static_cast<std::size_t>(samples.front().values.size());
  }
  /// Rows [first, first + count) as an (count x L) matrix, one sample per row.
  Eigen::MatrixXd rows(std::size_t first, std::size_t count) const;
  Eigen::MatrixXd rows() const { return rows(0, size()); }
};

// --- record files ----------------------------------------------------------

/// Parses whitespace-separated numeric columns. Throws ParseError naming the
/// offending line for bad tokens, ragged rows, or a row count other than
/// `expected_rows`.
RawRecord parse_record(std::istream& in, std::size_t expected_rows);
RawRecord parse_record_text(std::string_view text, std::size_t expected_rows);
RawRecord read_record_file(const std::filesystem::path& path, std::size_t expected_rows);

/// Tab-separated rendering with round-trip precision.
std::string serialize_record(const RawRecord& record);
void write_record_file(const std::filesystem::path& path, const RawRecord& record);

std::chrono::sys_seconds parse_timestamp(std::string_view name,
                                         const std::string& format = kImsTimestampFormat);
std::string format_timestamp(std::chrono::sys_seconds ts,
                             const std::string& format = kImsTimestampFormat);

// --- catalogs ----------------------------------------------------------------

struct CatalogOptions {
  std::string timestamp_format = kImsTimestampFormat;
  std::size_t decimation = 1;  // keep every k-th time point
};

/// Selects `channel` from each record and orders the samples by the timestamp
/// encoded in their names. Ordinals are 0..N-1 in time order.
SampleCatalog build_catalog(std::span<const NamedRecord> files, const std::string& bearing_id,
                            std::size_t channel, const CatalogOptions& options = {});

/// Same as build_catalog, reading every regular file in `dir`. Records are
/// parsed one at a time and only the selected column is retained.
SampleCatalog load_catalog_dir(const std::filesystem::path& dir, const std::string& bearing_id,
                               std::size_t channel, const CatalogOptions& options = {},
                               std::size_t expected_rows = kImsRecordRows);

SampleCatalog decimate(const SampleCatalog& catalog, std::size_t factor);

// --- bearing / channel mapping ----------------------------------------------

struct BearingId {
  int test = 0;     // 1-based experiment number
  int bearing = 0;  // 1-based bearing number
};

/// Parses labels of the form "S<test>B<bearing>", e.g. "S1B3".
BearingId parse_bearing_id(std::string_view label);

/// Zero-based column for a bearing/sensor pair. Eight-channel records carry
/// two sensors per bearing (columns 2b-2, 2b-1); four-channel records one
/// (column b-1).
std::size_t channel_for(std::size_t channel_count, int bearing, int sensor = 1);

// --- scaling -----------------------------------------------------------------

/// Maps entries into [0,1]. Bounds are fitted on the first `fit_count`
/// samples (0 = all) and applied to every sample; entries of unfitted samples
/// falling outside the bounds are clipped. Throws NumericalError on a
/// constant fit region.
SampleCatalog scale_catalog(const SampleCatalog& catalog, ScalingMode mode,
                            std::size_t fit_count = 0);

/// Inverse of global-minmax scaling. Identity for mode none.
SampleCatalog unscale_catalog(const SampleCatalog& catalog);

// --- synthetic data ----------------------------------------------------------

struct SynthConfig {
  std::size_t n_samples = 300;
  std::size_t sample_len = kImsRecordRows;
  std::size_t change_point = 200;
  double severity_growth = 0.02;  // fault amplitude gained per sample
  std::uint64_t seed = 1;

  double sample_rate = 20000.0;
  double shaft_hz = 2000.0 / 60.0;
  double shaft_amplitude = 1.0;
  double fault_hz = 236.4;
  double noise_std = 0.1;
  double noise_pole = 0.6;  // one-pole low-pass coefficient for band limiting
  std::int64_t start_epoch_seconds = 1076581959;  // 2004-02-12 10:32:39 UTC
  std::int64_t cadence_seconds = 600;
};

/// Deterministic run-to-failure catalog: coloured noise plus a shaft tone,
/// and from `change_point` on a fault tone whose amplitude grows linearly.
SampleCatalog synth_run_to_failure(const SynthConfig& config);
SampleCatalog synth_run_to_failure(std::size_t n_samples, std::size_t sample_len,
                                   std::size_t change_point, double severity_growth,
                                   std::uint64_t seed);

/// Renders each sample as an IMS-style single-column record file in `dir`.
std::vector<std::filesystem::path> write_catalog_records(const SampleCatalog& catalog,
                                                         const std::filesystem::path& dir);

/// Catalog index: bearing_id, channel, N, scaling, ordered source names.
nlohmann::json catalog_index(const SampleCatalog& catalog);

}  // namespace aec
