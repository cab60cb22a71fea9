#include "cli.hpp"

#include "icanclean/cleaner.hpp"
#include "icanclean/recording_io.hpp"
#include "icanclean/report.hpp"
#include "icanclean/synth_bench.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <optional>
#include <ostream>

namespace icanclean::cli {

namespace {

struct CleanArgs {
  std::string data;
  std::string noise;
  std::string out;
  double thresh = 0.0;
  std::string source = "u";
  long window = 0;
  std::optional<long> hop;
  std::string report;
};

struct SynthArgs {
  ScenarioParams params;
  std::string out_data;
  std::string out_noise;
  std::string out_truth;
};

struct BenchArgs {
  BenchParams params;
  std::string report;
};

int cmd_clean(const CleanArgs& a, std::ostream& out) {
  CleanConfig config;
  config.thresh = a.thresh;
  config.source = a.source == "v" ? ComponentSource::NoiseVariates : ComponentSource::DataVariates;
  config.window_len = a.window;
  config.window_hop = a.hop.value_or(0);
  if (a.hop && a.window == 0) throw ConfigError("--hop needs --window");
  config.validate();

  const Recording x = read_recording(a.data);
  const Recording y = read_recording(a.noise);

  const auto start = std::chrono::steady_clock::now();
  auto result = clean(x, y, config);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  CleanRunInfo info;
  info.mode = config.window_len == 0 ? "batch" : "sliding";
  info.n_samples = x.n_samples();
  info.n_data = x.n_channels();
  info.n_noise = y.n_channels();
  info.config = config;
  info.elapsed_seconds = elapsed;
  const std::string report = format_clean_report(result.report, info);

  write_recording(result.x_clean, a.out);
  if (!a.report.empty()) write_file_atomic(a.report, report);
  out << "cleaned " << x.n_samples() << " samples x " << x.n_channels() << " channels, removed "
      << result.report.bad_indices.size() << " of " << result.report.n_comp << " components\n";
  return kExitOk;
}

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  const Scenario sc = generate_scenario(a.params);
  write_recording(sc.x, a.out_data);
  write_recording(sc.y, a.out_noise);
  if (!a.out_truth.empty()) write_recording(sc.truth, a.out_truth);
  out << "wrote scenario: " << sc.x.n_samples() << " samples, " << sc.x.n_channels() << " data and "
      << sc.y.n_channels() << " noise channels\n";
  return kExitOk;
}

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  const BenchReport r = benchmark_throughput(a.params);
  const std::string text = format_bench_report(r);
  out << text;
  if (!a.report.empty()) write_file_atomic(a.report, text);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reference-noise cleaning of multichannel recordings via canonical correlation analysis",
               "icanclean"};
  app.require_subcommand(1);

  CleanArgs clean_args;
  auto* clean_cmd = app.add_subcommand("clean", "Clean a data recording using a reference noise recording");
  clean_cmd->add_option("--data", clean_args.data, "Data recording CSV")->required();
  clean_cmd->add_option("--noise", clean_args.noise, "Reference noise recording CSV")->required();
  clean_cmd->add_option("--out", clean_args.out, "Cleaned output CSV")->required();
  clean_cmd->add_option("--thresh", clean_args.thresh, "R^2 threshold for removing a component")
      ->required()
      ->check(CLI::Range(0.0, 1.0));
  clean_cmd->add_option("--source", clean_args.source, "Variates to remove: u (data) or v (noise)")
      ->check(CLI::IsMember({"u", "v"}));
  clean_cmd->add_option("--window", clean_args.window, "Samples per window, 0 for the whole record")
      ->check(CLI::NonNegativeNumber);
  clean_cmd->add_option("--hop", clean_args.hop, "Samples between window starts (default: window)")
      ->check(CLI::PositiveNumber);
  clean_cmd->add_option("--report", clean_args.report, "Write a key=value report here");

  SynthArgs synth_args;
  auto& sp = synth_args.params;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic scenario with known ground truth");
  synth_cmd->add_option("--samples", sp.n_samples, "Number of samples")->capture_default_str();
  synth_cmd->add_option("--data-channels", sp.n_data, "Data channels")->capture_default_str();
  synth_cmd->add_option("--noise-channels", sp.n_noise_channels, "Reference channels")->capture_default_str();
  synth_cmd->add_option("--signal-sources", sp.n_signal_sources, "Ground-truth sources")->capture_default_str();
  synth_cmd->add_option("--noise-sources", sp.n_noise_sources, "Noise sources")->capture_default_str();
  synth_cmd->add_option("--rate", sp.sampling_rate_hz, "Sampling rate in Hz")->capture_default_str();
  synth_cmd->add_option("--ref-noise", sp.ref_sensor_noise_level, "Reference sensor noise level")
      ->capture_default_str();
  synth_cmd->add_option("--noise-gain", sp.noise_gain, "Noise-to-data mixing gain")->capture_default_str();
  synth_cmd->add_option("--onset", sp.noise_onset, "First sample with noise present")->capture_default_str();
  synth_cmd->add_option("--seed", sp.seed, "Generator seed")->capture_default_str();
  synth_cmd->add_option("--out-data", synth_args.out_data, "Data CSV")->required();
  synth_cmd->add_option("--out-noise", synth_args.out_noise, "Reference noise CSV")->required();
  synth_cmd->add_option("--out-truth", synth_args.out_truth, "Ground-truth CSV");

  BenchArgs bench_args;
  auto& bp = bench_args.params;
  auto* bench_cmd = app.add_subcommand("bench", "Measure cleaning throughput on a synthetic scenario");
  bench_cmd->add_option("--samples", bp.n_samples, "Number of samples")->capture_default_str();
  bench_cmd->add_option("--data-channels", bp.n_data, "Data channels")->capture_default_str();
  bench_cmd->add_option("--noise-channels", bp.n_noise, "Reference channels")->capture_default_str();
  bench_cmd->add_option("--window", bp.window_len, "Sliding window length, 0 to skip")->capture_default_str();
  bench_cmd->add_option("--hop", bp.window_hop, "Sliding hop (default: window)");
  bench_cmd->add_option("--reps", bp.repetitions, "Repetitions (best time is reported)")->capture_default_str();
  bench_cmd->add_option("--rate", bp.sampling_rate_hz, "Sampling rate in Hz")->capture_default_str();
  bench_cmd->add_option("--thresh", bp.thresh, "R^2 threshold")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  bench_cmd->add_option("--seed", bp.seed, "Generator seed")->capture_default_str();
  bench_cmd->add_option("--report", bench_args.report, "Also write the report here");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* context = &app;
    for (const auto* sub : {clean_cmd, synth_cmd, bench_cmd}) {
      if (sub->parsed()) context = sub;
    }
    err << context->help();
    return kExitUsage;
  }

  try {
    if (clean_cmd->parsed()) return cmd_clean(clean_args, out);
    if (synth_cmd->parsed()) return cmd_synth(synth_args, out);
    return cmd_bench(bench_args, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
}

}  // namespace icanclean::cli
