// aec: command-line front end for the health-rate pipeline.
//
//   aec synth   --out DIR [--n N --len L --change-point C --growth G --seed S]
//   aec ingest  --dataset DIR --bearing S2B1 [--channel N] [--out index.json]
//   aec train   [run options] --out DIR
//   aec monitor [run options] --out DIR
//   aec online  [run options] --out DIR
//   aec report  --out DIR [--reference-ordinal R] [--baselines]
//
// Exit codes: 0 success with a detection, 2 success without one, 1 error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "aec/error.hpp"
#include "aec/pipeline.hpp"

namespace {

constexpr int kExitDetected = 0;
constexpr int kExitError = 1;
constexpr int kExitNoDetection = 2;

struct Overrides {
  std::string config;
  std::string preset;
  std::string dataset;
  std::string bearing;
  std::optional<std::size_t> channel;
  std::optional<int> sensor;
  std::optional<std::size_t> rows;
  std::string framework;
  std::optional<double> train_fraction;
  std::optional<std::size_t> hidden;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> wsize;
  std::optional<double> theta;
  std::optional<std::size_t> lag;
  std::optional<std::size_t> warmup;
  std::optional<double> min_span;
  std::optional<std::size_t> decimate;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::size_t> reference;
  bool synthetic = false;
  bool quiet = false;
};

void add_run_options(CLI::App* app, Overrides& o, bool with_framework) {
  app->add_option("--config", o.config, "JSON run configuration (or a provenance.json)");
  app->add_option("--preset", o.preset, "Named preset applied before other flags (full = defaults)")
      ->check(CLI::IsMember({"desk", "full"}));
  app->add_option("--dataset", o.dataset, "Directory of IMS record files");
  app->add_option("--bearing", o.bearing, "Bearing label, e.g. S1B3");
  app->add_option("--channel", o.channel, "Zero-based column (overrides bearing mapping)");
  app->add_option("--sensor", o.sensor, "Sensor number for two-sensor bearings");
  app->add_option("--rows", o.rows, "Expected rows per record file");
  if (with_framework) {
    app->add_option("--framework", o.framework)->check(CLI::IsMember({"monitor", "online"}));
  }
  app->add_option("--train-fraction", o.train_fraction);
  app->add_option("--hidden", o.hidden, "Hidden units");
  app->add_option("--epochs", o.epochs, "Maximum SCG epochs");
  app->add_option("--wsize", o.wsize, "Moving-average window");
  app->add_option("--theta", o.theta, "Detection ratio threshold");
  app->add_option("--lag", o.lag, "Detection lag in samples");
  app->add_option("--warmup", o.warmup, "Samples exempt from detection");
  app->add_option("--min-span", o.min_span, "Normalization span floor (0 = plain min-max)");
  app->add_option("--decimate", o.decimate, "Keep every k-th point of each record");
  app->add_option("--seed", o.seed);
  app->add_option("--out", o.out, "Output directory");
  app->add_option("--reference-ordinal", o.reference, "Reference start point for accuracy");
  app->add_flag("--synthetic", o.synthetic, "Use the built-in generator instead of a dataset");
  app->add_flag("--quiet", o.quiet, "No per-epoch progress on stderr");
}

aec::RunConfig resolve(const Overrides& o) {
  aec::RunConfig c;
  if (o.preset == "desk") c = aec::desk_preset(c);
  if (!o.config.empty()) c = aec::load_run_config(o.config, c);
  if (!o.dataset.empty()) c.dataset_root = o.dataset;
  if (o.synthetic && !c.synthetic) c.synthetic = aec::SynthConfig{};
  if (!o.bearing.empty()) c.bearing_id = o.bearing;
  if (o.channel) c.channel = o.channel;
  if (o.sensor) c.sensor = *o.sensor;
  if (o.rows) c.expected_rows = *o.rows;
  if (!o.framework.empty()) c.framework = aec::framework_from_string(o.framework);
  if (o.train_fraction) c.train_fraction = *o.train_fraction;
  if (o.hidden) c.ae.hidden_dim = *o.hidden;
  if (o.epochs) c.train.max_epochs = *o.epochs;
  if (o.wsize) c.aec.w_size = *o.wsize;
  if (o.theta) c.detector.theta = *o.theta;
  if (o.lag) c.detector.lag = *o.lag;
  if (o.warmup) c.detector.warmup = *o.warmup;
  if (o.min_span) c.aec.min_span = *o.min_span;
  if (o.decimate) c.decimation = *o.decimate;
  if (o.seed) c.seed = *o.seed;
  if (!o.out.empty()) c.out_dir = o.out;
  if (o.reference) c.reference_ordinal = o.reference;
  return c;
}

aec::ProgressFn progress_printer(bool quiet) {
  if (quiet) return {};
  return [](std::size_t epoch, double cost, double grad_norm) {
    std::cerr << "epoch " << epoch << " cost " << cost << " grad " << grad_norm << "\n";
  };
}

void print_summary(const nlohmann::json& detection) {
  std::cout << "series: " << detection.value("series_id", "") << "\n";
  const auto& start = detection.at("degradation_start");
  std::cout << "degradation_start: " << (start.is_null() ? "none" : start.dump()) << "\n";
  if (detection.contains("accuracy") && !detection.at("accuracy").is_null()) {
    std::cout << "accuracy: " << 100.0 * detection.at("accuracy").get<double>() << "%\n";
  }
}

int cmd_synth(const aec::SynthConfig& sc, const std::string& out) {
  const aec::SampleCatalog catalog = aec::synth_run_to_failure(sc);
  const auto files = aec::write_catalog_records(catalog, out);
  nlohmann::json truth = aec::catalog_index(catalog);
  truth["rows"] = sc.sample_len;
  truth["severity_growth"] = sc.severity_growth;
  truth["seed"] = sc.seed;
  aec::write_text_file(std::filesystem::path(out) / "ground_truth.json", truth.dump(2) + "\n");
  std::cout << "wrote " << files.size() << " records to " << out << " (rows per record "
            << sc.sample_len << ", change point " << sc.change_point << ")\n";
  return kExitDetected;
}

int cmd_ingest(const Overrides& o, const std::string& scaling) {
  aec::RunConfig c = resolve(o);
  aec::SampleCatalog catalog = aec::resolve_catalog(c);
  if (!scaling.empty()) catalog = aec::scale_catalog(catalog, aec::scaling_mode_from_string(scaling));
  const std::string text = aec::catalog_index(catalog).dump(2) + "\n";
  if (o.out.empty()) {
    std::cout << text;
  } else {
    aec::write_text_file(o.out, text);
    std::cout << "catalog index for " << catalog.size() << " samples written to " << o.out << "\n";
  }
  return kExitDetected;
}

int cmd_train(const Overrides& o) {
  aec::RunConfig c = resolve(o);
  c.validate();
  const aec::SampleCatalog raw = aec::resolve_catalog(c);
  const bool online = c.framework == aec::Framework::online;
  const std::size_t n_train =
      online ? static_cast<std::size_t>(c.train_fraction * static_cast<double>(raw.size()))
             : raw.size();
  if (n_train < 1) throw aec::ConfigError("no samples left for training");
  const aec::SampleCatalog scaled = aec::scale_catalog(raw, c.scaling, n_train);
  aec::AEConfig ae = c.ae;
  ae.input_dim = scaled.sample_length();
  ae.seed = c.seed;
  aec::TrainConfig tc = c.train;
  tc.seed = c.seed;
  auto [params, report] =
      aec::train(aec::init_params(ae), scaled.rows(0, n_train), ae, tc, progress_printer(o.quiet));
  std::filesystem::create_directories(c.out_dir);
  aec::save_params_binary(c.out_dir / "params.bin", params, ae);
  nlohmann::json rep = aec::to_json(report);
  rep["autoencoder"] = aec::to_json(ae);
  rep["scaling"] = aec::catalog_index(scaled).at("scaling");
  aec::write_text_file(c.out_dir / "train_report.json", rep.dump(2) + "\n");
  std::cout << "trained on " << n_train << " samples: cost " << report.initial_cost << " -> "
            << report.final_cost() << " (" << aec::to_string(report.stop_reason) << ", "
            << report.epochs_run << " epochs)\n";
  return kExitDetected;
}

int cmd_run(const Overrides& o, aec::Framework framework) {
  aec::RunConfig c = resolve(o);
  c.framework = framework;
  if (framework == aec::Framework::monitor) c.train_fraction = 1.0;
  c.validate();
  const aec::SampleCatalog raw = aec::resolve_catalog(c);
  if (!o.quiet) {
    std::cerr << "catalog " << raw.bearing_id << " channel " << raw.channel << ": " << raw.size()
              << " samples of length " << raw.sample_length() << "\n";
  }
  aec::RunResult result = aec::run(c, raw, progress_printer(o.quiet));
  const auto manifest = aec::emit_outputs(result, c.out_dir);
  print_summary(aec::read_json_file(c.out_dir / "detection.json"));
  for (const auto& p : manifest) std::cout << "wrote " << p.string() << "\n";
  return result.detection.degradation_start ? kExitDetected : kExitNoDetection;
}

int cmd_report(const Overrides& o, bool baselines) {
  const std::filesystem::path dir = o.out.empty() ? "aec_out" : o.out;
  nlohmann::json detection = aec::read_json_file(dir / "detection.json");
  const nlohmann::json train = aec::read_json_file(dir / "train_report.json");
  const auto& start = detection.at("degradation_start");
  const std::size_t n = detection.at("N").get<std::size_t>();
  if (o.reference && !start.is_null()) {
    detection["accuracy"] = aec::prediction_accuracy(start.get<std::size_t>(), *o.reference, n);
  }
  print_summary(detection);
  std::cout << "training: " << train.at("epochs_run") << " epochs, cost "
            << train.at("initial_cost") << " -> " << train.at("final_cost") << " ("
            << train.at("stop_reason").get<std::string>() << ")\n";

  if (baselines) {
    aec::RunConfig c = aec::load_run_config(dir / "provenance.json");
    const aec::SampleCatalog raw = aec::resolve_catalog(c);
    nlohmann::json out = nlohmann::json::object();
    for (aec::Baseline b : {aec::Baseline::rms, aec::Baseline::kurtosis}) {
      const aec::AecSeries s = aec::baseline_rate(raw, b, c.aec);
      const aec::DetectionReport d = aec::detect_degradation(
          s.filtered, c.detector, aec::Trend::rising, raw.bearing_id + "/" + aec::to_string(b));
      aec::write_text_file(dir / ("baseline_" + aec::to_string(b) + ".csv"), aec::series_csv(s));
      out[aec::to_string(b)] = aec::to_json(d);
      std::cout << aec::to_string(b) << " baseline start: "
                << (d.degradation_start ? std::to_string(*d.degradation_start) : "none") << "\n";
    }
    aec::write_text_file(dir / "baselines.json", out.dump(2) + "\n");
  }
  return start.is_null() ? kExitNoDetection : kExitDetected;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Autoencoder-correlation health monitoring for bearings"};
  app.require_subcommand(1);

  aec::SynthConfig synth;
  std::string synth_out = "synth_data";
  auto* s = app.add_subcommand("synth", "Generate a synthetic run-to-failure dataset");
  s->add_option("--out", synth_out, "Output directory for record files");
  s->add_option("--n", synth.n_samples);
  s->add_option("--len", synth.sample_len);
  s->add_option("--change-point", synth.change_point);
  s->add_option("--growth", synth.severity_growth);
  s->add_option("--noise", synth.noise_std);
  s->add_option("--seed", synth.seed);

  Overrides ingest_o, train_o, monitor_o, online_o, report_o;
  std::string scaling;
  auto* ing = app.add_subcommand("ingest", "Build a catalog index from a dataset directory");
  add_run_options(ing, ingest_o, false);
  ing->add_option("--scaling", scaling)->check(
      CLI::IsMember({"none", "global-minmax", "per-sample-minmax"}));

  auto* tr = app.add_subcommand("train", "Train the autoencoder and save its parameters");
  add_run_options(tr, train_o, true);
  auto* mon = app.add_subcommand("monitor", "Train on all samples and detect degradation");
  add_run_options(mon, monitor_o, false);
  auto* onl = app.add_subcommand("online", "Train on a leading fraction and predict on the rest");
  add_run_options(onl, online_o, false);

  bool baselines = false;
  auto* rep = app.add_subcommand("report", "Summarize a run directory");
  rep->add_option("--out", report_o.out, "Run output directory");
  rep->add_option("--reference-ordinal", report_o.reference);
  rep->add_flag("--baselines", baselines, "Also compute RMS and kurtosis baselines");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (*s) return cmd_synth(synth, synth_out);
    if (*ing) return cmd_ingest(ingest_o, scaling);
    if (*tr) return cmd_train(train_o);
    if (*mon) return cmd_run(monitor_o, aec::Framework::monitor);
    if (*onl) return cmd_run(online_o, aec::Framework::online);
    if (*rep) return cmd_report(report_o, baselines);
  } catch (const std::exception& e) {
    std::cerr << "aec: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
