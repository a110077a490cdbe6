#include "aec/pipeline.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>

#include "aec/error.hpp"

namespace aec {

namespace {

std::string utc_now() {
  const auto now = std::chrono::time_point_cast<std::chrono::seconds>(
      std::chrono::system_clock::now());
  return format_timestamp(std::chrono::sys_seconds{now.time_since_epoch()}, "%Y-%m-%dT%H:%M:%SZ");
}

// Prefixes errors with the pipeline stage that raised them.
template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ParseError& e) {
    throw ParseError(std::string(name) + ": " + e.what());
  } catch (const DimensionError& e) {
    throw DimensionError(std::string(name) + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(name) + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(name) + ": " + e.what());
  } catch (const IoError& e) {
    throw IoError(std::string(name) + ": " + e.what());
  }
}

std::size_t resolve_channel(const RunConfig& config, const std::filesystem::path& root) {
  if (config.channel) return *config.channel;
  const BearingId id = parse_bearing_id(config.bearing_id);
  // Peek at one record for its column count.
  for (const auto& entry : std::filesystem::directory_iterator(root)) {
    const auto name = entry.path().filename().string();
    if (!entry.is_regular_file() || name.empty() || name.front() == '.') continue;
    try {
      parse_timestamp(name, config.timestamp_format);
    } catch (const ParseError&) {
      continue;
    }
    const RawRecord r = read_record_file(entry.path(), config.expected_rows);
    return channel_for(r.channel_count(), id.bearing, config.sensor);
  }
  throw IoError("no record files in " + root.string());
}

RunResult finish(const RunConfig& config, const SampleCatalog& scaled, AEParams params,
                 AEConfig ae, TrainReport report, std::size_t n_train,
                 std::optional<std::size_t> normalization_fit, const std::string& started) {
  RunResult result;
  const Eigen::MatrixXd X = scaled.rows();
  const Eigen::MatrixXd F = stage("encode", [&] { return encode_rows(params, X); });

  AecOptions options = config.aec;
  options.fit_count = normalization_fit;
  result.series = stage("aec-rate", [&] { return aec_rate(F, options); });

  const std::string series_id = scaled.bearing_id + "/ch" + std::to_string(scaled.channel) + "/" +
                                to_string(config.framework);
  result.detection = stage("detect", [&] {
    return detect_degradation(result.series.filtered, config.detector, Trend::falling, series_id);
  });
  if (!detection_consistent(result.series.filtered, result.detection)) {
    throw NumericalError("detect: reported start point fails re-evaluation");
  }

  result.n_samples = scaled.size();
  result.n_train = n_train;
  result.reference_ordinal = config.reference_ordinal;
  if (config.reference_ordinal && result.detection.degradation_start) {
    result.accuracy = prediction_accuracy(*result.detection.degradation_start,
                                          *config.reference_ordinal, scaled.size());
  }
  result.train = std::move(report);
  result.params = std::move(params);
  result.ae_config = ae;
  result.catalog = catalog_index(scaled);

  const nlohmann::json resolved = to_json(config);
  result.provenance = {{"config", resolved},
                       {"config_hash", config_hash(resolved)},
                       {"seed", config.seed},
                       {"started_at", started},
                       {"finished_at", utc_now()},
                       {"n_samples", scaled.size()},
                       {"n_train", n_train},
                       {"input_dim", ae.input_dim}};
  return result;
}

struct Trained {
  AEParams params;
  AEConfig ae;
  TrainReport report;
};

Trained train_on(const RunConfig& config, const SampleCatalog& scaled, std::size_t n_train,
                 const ProgressFn& progress) {
  Trained t;
  t.ae = config.ae;
  t.ae.input_dim = scaled.sample_length();
  t.ae.seed = config.seed;
  TrainConfig tc = config.train;
  tc.seed = config.seed;
  const Eigen::MatrixXd X = scaled.rows(0, n_train);
  auto [params, report] = stage("train", [&] { return train(init_params(t.ae), X, t.ae, tc, progress); });
  t.params = std::move(params);
  t.report = std::move(report);
  return t;
}

}  // namespace

SampleCatalog resolve_catalog(const RunConfig& config) {
  return stage("ingest", [&] {
    if (config.synthetic) {
      return decimate(synth_run_to_failure(*config.synthetic), config.decimation);
    }
    std::filesystem::path root = config.dataset_root;
    if (root.empty()) {
      if (const char* env = std::getenv(kDatasetEnvVar)) root = env;
    }
    if (root.empty()) {
      throw ConfigError(std::string("no dataset given (use --dataset or set ") + kDatasetEnvVar +
                        ")");
    }
    CatalogOptions opts;
    opts.timestamp_format = config.timestamp_format;
    opts.decimation = config.decimation;
    const std::size_t channel = resolve_channel(config, root);
    return load_catalog_dir(root, config.bearing_id, channel, opts, config.expected_rows);
  });
}

RunResult run_monitor(const RunConfig& config, const SampleCatalog& catalog,
                      const ProgressFn& progress) {
  config.validate();
  if (config.framework != Framework::monitor) {
    throw ConfigError("run_monitor called with framework " + to_string(config.framework));
  }
  const std::string started = utc_now();
  const SampleCatalog scaled = stage("scale", [&] { return scale_catalog(catalog, config.scaling); });
  Trained t = train_on(config, scaled, scaled.size(), progress);
  return finish(config, scaled, std::move(t.params), t.ae, std::move(t.report), scaled.size(),
                std::nullopt, started);
}

RunResult run_online(const RunConfig& config, const SampleCatalog& catalog,
                     const ProgressFn& progress) {
  config.validate();
  if (config.framework != Framework::online) {
    throw ConfigError("run_online called with framework " + to_string(config.framework));
  }
  const std::string started = utc_now();
  const auto n = catalog.size();
  const auto n_train =
      static_cast<std::size_t>(std::floor(config.train_fraction * static_cast<double>(n)));
  if (n_train < 2 || n_train >= n) {
    throw ConfigError("train_fraction " + std::to_string(config.train_fraction) + " leaves " +
                      std::to_string(n_train) + " of " + std::to_string(n) +
                      " samples for training; need 2 <= n_train < N");
  }
  const SampleCatalog scaled =
      stage("scale", [&] { return scale_catalog(catalog, config.scaling, n_train); });
  Trained t = train_on(config, scaled, n_train, progress);
  return finish(config, scaled, std::move(t.params), t.ae, std::move(t.report), n_train, n_train,
                started);
}

RunResult run_monitor(const RunConfig& config) { return run_monitor(config, resolve_catalog(config)); }

RunResult run_online(const RunConfig& config) { return run_online(config, resolve_catalog(config)); }

RunResult run(const RunConfig& config, const SampleCatalog& catalog, const ProgressFn& progress) {
  return config.framework == Framework::monitor ? run_monitor(config, catalog, progress)
                                                : run_online(config, catalog, progress);
}

RunResult run(const RunConfig& config) { return run(config, resolve_catalog(config)); }

std::string plot_data_csv(const RunResult& result) {
  std::string out = "ordinal,filtered,flag\n";
  char buf[32];
  for (std::size_t i = 0; i < result.series.size(); ++i) {
    out += std::to_string(i);
    out.push_back(',');
    auto res = std::to_chars(buf, buf + sizeof buf, result.series.filtered(static_cast<Eigen::Index>(i)));
    out.append(buf, res.ptr);
    out += result.detection.flags[i] ? ",1\n" : ",0\n";
  }
  return out;
}

std::vector<std::filesystem::path> emit_outputs(const RunResult& result,
                                                const std::filesystem::path& out_dir) {
  return stage("emit", [&] {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

    nlohmann::json detection = to_json(result.detection);
    detection["rate"] = series_sidecar(result.series);
    detection["n_train"] = result.n_train;
    detection["reference_ordinal"] =
        result.reference_ordinal ? nlohmann::json(*result.reference_ordinal) : nullptr;
    detection["accuracy"] = result.accuracy ? nlohmann::json(*result.accuracy) : nullptr;

    nlohmann::json train = to_json(result.train);
    train["autoencoder"] = to_json(result.ae_config);

    const std::vector<std::pair<std::string, std::string>> files{
        {"aec_series.csv", series_csv(result.series)},
        {"detection.json", detection.dump(2) + "\n"},
        {"train_report.json", train.dump(2) + "\n"},
        {"provenance.json", result.provenance.dump(2) + "\n"},
        {"plot_data.csv", plot_data_csv(result)},
    };
    std::vector<std::filesystem::path> manifest;
    for (const auto& [name, text] : files) {
      const auto path = out_dir / name;
      write_text_file(path, text);
      manifest.push_back(path);
    }
    return manifest;
  });
}

}  // namespace aec
