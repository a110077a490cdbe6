#include <cstdio>
#include <fstream>
#include <sstream>

#include "aec/error.hpp"
#include "aec/pipeline.hpp"

namespace aec {

namespace {

nlohmann::json synth_to_json(const SynthConfig& s) {
  return {{"n_samples", s.n_samples},
          {"sample_len", s.sample_len},
          {"change_point", s.change_point},
          {"severity_growth", s.severity_growth},
          {"seed", s.seed},
          {"sample_rate", s.sample_rate},
          {"shaft_hz", s.shaft_hz},
          {"shaft_amplitude", s.shaft_amplitude},
          {"fault_hz", s.fault_hz},
          {"noise_std", s.noise_std},
          {"noise_pole", s.noise_pole},
          {"start_epoch_seconds", s.start_epoch_seconds},
          {"cadence_seconds", s.cadence_seconds}};
}

SynthConfig synth_from_json(const nlohmann::json& j, SynthConfig s) {
  s.n_samples = j.value("n_samples", s.n_samples);
  s.sample_len = j.value("sample_len", s.sample_len);
  s.change_point = j.value("change_point", s.change_point);
  s.severity_growth = j.value("severity_growth", s.severity_growth);
  s.seed = j.value("seed", s.seed);
  s.sample_rate = j.value("sample_rate", s.sample_rate);
  s.shaft_hz = j.value("shaft_hz", s.shaft_hz);
  s.shaft_amplitude = j.value("shaft_amplitude", s.shaft_amplitude);
  s.fault_hz = j.value("fault_hz", s.fault_hz);
  s.noise_std = j.value("noise_std", s.noise_std);
  s.noise_pole = j.value("noise_pole", s.noise_pole);
  s.start_epoch_seconds = j.value("start_epoch_seconds", s.start_epoch_seconds);
  s.cadence_seconds = j.value("cadence_seconds", s.cadence_seconds);
  return s;
}

template <typename T>
nlohmann::json nullable(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

std::string to_string(Framework framework) {
  return framework == Framework::monitor ? "monitor" : "online";
}

Framework framework_from_string(const std::string& text) {
  if (text == "monitor") return Framework::monitor;
  if (text == "online") return Framework::online;
  throw ConfigError("unknown framework '" + text + "' (expected monitor or online)");
}

void RunConfig::validate() const {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
    throw ConfigError("train_fraction must lie in (0, 1]");
  }
  if (framework == Framework::online && train_fraction >= 1.0) {
    throw ConfigError("the online framework needs train_fraction < 1");
  }
  if (decimation < 1) throw ConfigError("decimation factor must be >= 1");
  if (ae.hidden_dim < 1) throw ConfigError("hidden_dim must be >= 1");
  if (aec.w_size < 1) throw ConfigError("w_size must be >= 1");
  if (sensor < 1) throw ConfigError("sensor numbers are 1-based");
  train.validate();
  detector.validate();
}

RunConfig desk_preset(RunConfig base) {
  base.decimation = 16;
  base.ae.hidden_dim = 64;
  base.train.max_epochs = 150;
  return base;
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json ae = to_json(c.ae);
  ae.erase("input_dim");
  ae.erase("seed");
  nlohmann::json train = to_json(c.train);
  train.erase("seed");
  nlohmann::json aec = to_json(c.aec);
  aec.erase("fit_count");
  return {{"dataset_root", c.dataset_root.string()},
          {"synthetic", c.synthetic ? synth_to_json(*c.synthetic) : nlohmann::json(nullptr)},
          {"bearing_id", c.bearing_id},
          {"channel", nullable(c.channel)},
          {"sensor", c.sensor},
          {"expected_rows", c.expected_rows},
          {"timestamp_format", c.timestamp_format},
          {"decimation", c.decimation},
          {"scaling", to_string(c.scaling)},
          {"autoencoder", ae},
          {"train", train},
          {"aec", aec},
          {"detector", to_json(c.detector)},
          {"framework", to_string(c.framework)},
          {"train_fraction", c.train_fraction},
          {"reference_ordinal", nullable(c.reference_ordinal)},
          {"out_dir", c.out_dir.string()},
          {"seed", c.seed}};
}

RunConfig run_config_from_json(const nlohmann::json& j, RunConfig c) {
  try {
    if (j.contains("dataset_root")) c.dataset_root = j.at("dataset_root").get<std::string>();
    if (j.contains("synthetic")) {
      const auto& s = j.at("synthetic");
      if (s.is_null()) {
        c.synthetic.reset();
      } else {
        c.synthetic = synth_from_json(s, c.synthetic.value_or(SynthConfig{}));
      }
    }
    c.bearing_id = j.value("bearing_id", c.bearing_id);
    if (j.contains("channel")) {
      const auto& ch = j.at("channel");
      c.channel = ch.is_null() ? std::nullopt : std::optional<std::size_t>(ch.get<std::size_t>());
    }
    c.sensor = j.value("sensor", c.sensor);
    c.expected_rows = j.value("expected_rows", c.expected_rows);
    c.timestamp_format = j.value("timestamp_format", c.timestamp_format);
    c.decimation = j.value("decimation", c.decimation);
    if (j.contains("scaling")) c.scaling = scaling_mode_from_string(j.at("scaling").get<std::string>());
    if (j.contains("autoencoder")) c.ae = ae_config_from_json(j.at("autoencoder"), c.ae);
    if (j.contains("train")) c.train = train_config_from_json(j.at("train"), c.train);
    if (j.contains("aec")) c.aec = aec_options_from_json(j.at("aec"), c.aec);
    if (j.contains("detector")) c.detector = detector_config_from_json(j.at("detector"), c.detector);
    if (j.contains("framework")) c.framework = framework_from_string(j.at("framework").get<std::string>());
    c.train_fraction = j.value("train_fraction", c.train_fraction);
    if (j.contains("reference_ordinal")) {
      const auto& r = j.at("reference_ordinal");
      c.reference_ordinal =
          r.is_null() ? std::nullopt : std::optional<std::size_t>(r.get<std::size_t>());
    }
    if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid run configuration: ") + e.what());
  }
  c.aec.fit_count.reset();
  return c;
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
  const nlohmann::json j = read_json_file(path);
  if (j.contains("config") && j.at("config").is_object()) {
    return run_config_from_json(j.at("config"), base);
  }
  return run_config_from_json(j, base);
}

std::string config_hash(const nlohmann::json& config) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : config.dump()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace aec
