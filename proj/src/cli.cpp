#include "siqrng/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "siqrng/detector_sim.hpp"
#include "siqrng/errors.hpp"
#include "siqrng/estimation.hpp"
#include "siqrng/extractor.hpp"
#include "siqrng/io/config.hpp"
#include "siqrng/io/files.hpp"
#include "siqrng/optimizer.hpp"
#include "siqrng/rng.hpp"
#include "siqrng/stat_suite.hpp"

namespace siqrng {
namespace {

namespace fs = std::filesystem;

struct ConfigArgs {
  std::string path;
  std::vector<std::string> overrides;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", path, "Config file (key = value lines)");
    app->add_option("--set", overrides, "Override one config key, key=value; repeatable")->allow_extra_args(false);
  }
  io::RunConfig load() const {
    return path.empty() ? io::parse_config("", overrides) : io::load_config(path, overrides);
  }
};

std::string format_g(double v, const char* fmt = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

void write_text_or_stdout(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") out << text;
  else io::write_file_atomic(path, std::string_view(text));
}

io::Metadata event_metadata(const io::RunConfig& config) {
  return {
      {"source.kind", config.source.kind == source::SourceKind::sunlight ? "sunlight" : "laser"},
      {"source.lambda", format_g(config.source.mean_photons, "%.17g")},
      {"source.pulse_rate", format_g(config.source.pulse_rate, "%.17g")},
      {"measurement.prob_x", format_g(config.measurement.prob_x, "%.17g")},
      {"run.seed", std::to_string(config.seed)},
      {"run.n_pulses", std::to_string(config.n_pulses)},
  };
}

void write_events(const fs::path& path, const detector::EventStream& events, const io::RunConfig& config,
                  io::EventFormat format) {
  if (format == io::EventFormat::text) io::write_events_text(path, events, event_metadata(config));
  else io::write_events_binary(path, events);
}

detector::EventStream simulate(const io::RunConfig& config) {
  detector::SimulationOptions sim;
  sim.threads = config.threads;
  return detector::run_simulation(config.source, config.detector, config.measurement, config.n_pulses, config.seed,
                                  sim);
}

io::TallyFile make_tally_file(const detector::EventStream& events, const io::RunConfig& config) {
  io::TallyFile file;
  file.tally = detector::tally(events);
  file.duration_s = config.duration > 0.0 ? config.duration
                                          : static_cast<double>(events.size()) / config.source.pulse_rate;
  file.prob_x = config.measurement.prob_x;
  return file;
}

struct CalibrationArgs {
  std::vector<std::uint64_t> x_counts;
  std::vector<std::uint64_t> z_counts;

  void attach(CLI::App* app, bool required) {
    auto* x = app->add_option("--x-counts", x_counts, "D0 D1 counts with the X' calibration setting")->expected(2);
    auto* z = app->add_option("--z-counts", z_counts, "D0 D1 counts with a Z' eigenstate (extinction gate)")->expected(2);
    if (required) {
      x->required();
      z->required();
    } else {
      x->needs(z);
      z->needs(x);
    }
  }
  bool given() const { return x_counts.size() == 2 && z_counts.size() == 2; }
  protocol::OverlapCalibration run() const {
    return protocol::overlap_bound_from_calibration({z_counts[0], z_counts[1]}, x_counts[0], x_counts[1]);
  }
};

std::string format_calibration(const protocol::OverlapCalibration& cal, const protocol::ZPrimeGate& gate) {
  std::ostringstream os;
  os << "extinction_db=" << format_g(gate.extinction_db(), "%.17g") << '\n'
     << "max_overlap_sq=" << format_g(cal.max_overlap_sq, "%.17g") << '\n'
     << "overlap_c=" << format_g(cal.overlap_c, "%.17g") << '\n'
     << "coefficient=" << format_g(cal.coefficient, "%.17g") << '\n';
  return os.str();
}

protocol::Estimate run_estimate(const io::TallyFile& tally, const io::RunConfig& config,
                                const CalibrationArgs* calibration) {
  protocol::EstimateOptions options = config.security;
  options.duration_s = tally.duration_s > 0.0 ? tally.duration_s : config.run_duration();
  if (tally.prob_x >= 0.0) options.prob_x = tally.prob_x;
  if (calibration != nullptr && calibration->given()) options.overlap_c = calibration->run().overlap_c;
  return protocol::estimate(tally.tally, options);
}

void report_estimate(const protocol::Estimate& est, std::ostream& err) {
  if (est.basis_ratio_mismatch)
    err << "warning: detected X share " << format_g(est.q_x) << " differs from the basis-choice probability by more "
        << "than 10%\n";
  if (est.aborted())
    err << "abort: R_final = " << format_g(est.rates.r_final) << " certifies no randomness\n";
}

optimizer::RateTable rate_table(const io::RunConfig& config) {
  std::vector<double> lambdas;
  const double step = config.rate_lambda_step;
  for (std::size_t i = 0;; ++i) {
    const double l = config.rate_lambda_min + static_cast<double>(i) * step;
    if (l > config.rate_lambda_max + 1e-9 * step) break;
    lambdas.push_back(l);
  }
  return optimizer::flatness_report(config.rate, lambdas, config.rate_duration);
}

std::string rate_csv(const optimizer::RateTable& table) {
  std::ostringstream os;
  optimizer::write_rate_csv(os, table);
  return os.str();
}

std::string stats_csv(const std::vector<stats::TestReport>& reports) {
  std::ostringstream os;
  stats::write_report_csv(os, reports);
  return os.str();
}

extractor::Extraction run_extract(const detector::EventStream& events, const protocol::Estimate& est,
                                  const fs::path& seed_path) {
  const BitVector raw = detector::raw_bits(events);
  const BitVector seed = io::read_seed_file(seed_path);
  return extractor::extract(raw, est.rates, seed);
}

int exit_for_stats(const std::vector<stats::TestReport>& reports, std::size_t max_failures, std::ostream& err) {
  const std::size_t failures = stats::count_failures(reports);
  if (failures <= max_failures) return kExitOk;
  err << failures << " of " << reports.size() << " statistical tests failed\n";
  return kExitStatFailure;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Source-independent QRNG toolkit: simulate, certify and extract randomness"};
  app.name("siqrng");
  app.require_subcommand(1);

  // simulate
  ConfigArgs sim_cfg;
  std::string sim_out;
  std::string sim_format;
  auto* sim = app.add_subcommand("simulate", "Simulate pulses and write an event file");
  sim_cfg.attach(sim);
  sim->add_option("-o,--out", sim_out, "Event file (default paths.events)");
  sim->add_option("--format", sim_format, "text or binary (default run.event_format)")
      ->check(CLI::IsMember({"text", "binary"}));

  // tally
  ConfigArgs tally_cfg;
  std::string tally_events;
  std::string tally_out;
  auto* tal = app.add_subcommand("tally", "Count an event file into a tally");
  tally_cfg.attach(tal);
  tal->add_option("-e,--events", tally_events, "Event file")->required();
  tal->add_option("-o,--out", tally_out, "Tally file (default stdout)");

  // estimate
  ConfigArgs est_cfg;
  CalibrationArgs est_cal;
  std::string est_tally;
  std::string est_out;
  auto* est = app.add_subcommand("estimate", "Finite-size randomness estimate from a tally");
  est_cfg.attach(est);
  est_cal.attach(est, false);
  est->add_option("-t,--tally", est_tally, "Tally file")->required();
  est->add_option("-o,--out", est_out, "Estimate file (default stdout)");

  // calibrate
  CalibrationArgs cal_args;
  std::string cal_out;
  auto* cal = app.add_subcommand("calibrate", "Overlap bound from calibration counts");
  cal_args.attach(cal, true);
  cal->add_option("-o,--out", cal_out, "Output file (default stdout)");

  // extract
  std::string ext_events;
  std::string ext_estimate;
  std::string ext_seed;
  std::string ext_out;
  auto* ext = app.add_subcommand("extract", "Toeplitz-hash raw Z bits into certified bits");
  ext->add_option("-e,--events", ext_events, "Event file")->required();
  ext->add_option("--estimate", ext_estimate, "Estimate file")->required();
  ext->add_option("-s,--seed-file", ext_seed, "Extractor seed file")->required();
  ext->add_option("-o,--out", ext_out, "Certified bits file; a .len sidecar is written next to it")->required();

  // optimize
  ConfigArgs opt_cfg;
  std::string opt_out;
  auto* opt = app.add_subcommand("optimize", "Rate versus mean photon number and its maximum");
  opt_cfg.attach(opt);
  opt->add_option("-o,--out", opt_out, "CSV file (default stdout)");

  // testsuite
  std::string ts_bits;
  std::string ts_out;
  double ts_alpha = stats::kDefaultAlpha;
  std::size_t ts_max_failures = 1;
  auto* ts = app.add_subcommand("testsuite", "Run the statistical battery on a bit file");
  ts->add_option("-b,--bits", ts_bits, "Bits file with .len sidecar")->required();
  ts->add_option("-o,--out", ts_out, "CSV file (default stdout)");
  ts->add_option("--alpha", ts_alpha, "Significance level")->capture_default_str();
  ts->add_option("--max-failures", ts_max_failures, "Failed tests tolerated before exit 3")->capture_default_str();

  // pipeline
  ConfigArgs pipe_cfg;
  std::string pipe_seed;
  std::string pipe_dir;
  std::size_t pipe_max_failures = 1;
  auto* pipe = app.add_subcommand("pipeline", "simulate, tally, estimate, extract, optimize and test");
  pipe_cfg.attach(pipe);
  pipe->add_option("-s,--seed-file", pipe_seed, "Extractor seed file (default paths.seed)");
  pipe->add_option("-d,--out-dir", pipe_dir, "Output directory (default paths.output)");
  pipe->add_option("--max-failures", pipe_max_failures, "Failed tests tolerated before exit 3")->capture_default_str();

  // convert
  std::string conv_in;
  std::string conv_out;
  std::string conv_format;
  auto* conv = app.add_subcommand("convert", "Convert an event file between text and binary");
  conv->add_option("-i,--in", conv_in, "Input event file")->required();
  conv->add_option("-o,--out", conv_out, "Output event file")->required();
  conv->add_option("--format", conv_format, "Output form")->required()->check(CLI::IsMember({"text", "binary"}));

  // make-seed
  std::size_t seed_bytes = 0;
  std::string seed_out;
  std::uint64_t seed_value = 0;
  auto* mks = app.add_subcommand("make-seed", "Write an extractor seed file");
  mks->add_option("-n,--bytes", seed_bytes, "Length in bytes")->required();
  mks->add_option("-o,--out", seed_out, "Seed file")->required();
  auto* seed_opt = mks->add_option("--seed", seed_value, "Deterministic seed (default: std::random_device)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (sim->parsed()) {
      const io::RunConfig config = sim_cfg.load();
      const fs::path path = sim_out.empty() ? config.events_path : fs::path(sim_out);
      if (path.empty()) throw ConfigError("no output path: pass --out or set paths.events");
      io::EventFormat format = config.event_format;
      if (!sim_format.empty()) format = sim_format == "text" ? io::EventFormat::text : io::EventFormat::binary;
      write_events(path, simulate(config), config, format);
      return kExitOk;
    }

    if (tal->parsed()) {
      const io::RunConfig config = tally_cfg.load();
      const auto file = io::read_events(tally_events);
      write_text_or_stdout(tally_out, io::format_tally(make_tally_file(file.events, config)), out);
      return kExitOk;
    }

    if (est->parsed()) {
      const io::RunConfig config = est_cfg.load();
      const auto tally = io::parse_tally(io::read_text_file(est_tally));
      const auto estimate = run_estimate(tally, config, &est_cal);
      write_text_or_stdout(est_out, io::format_estimate(estimate), out);
      report_estimate(estimate, err);
      return estimate.aborted() ? kExitAbort : kExitOk;
    }

    if (cal->parsed()) {
      const auto result = cal_args.run();
      write_text_or_stdout(cal_out, format_calibration(result, {cal_args.z_counts[0], cal_args.z_counts[1]}), out);
      return kExitOk;
    }

    if (ext->parsed()) {
      const auto events = io::read_events(ext_events);
      const auto estimate = io::parse_estimate(io::read_text_file(ext_estimate));
      const auto extraction = run_extract(events.events, estimate, ext_seed);
      io::write_certified_bits(ext_out, extraction.bits, std::exp2(estimate.security.log2_epsilon_total));
      return kExitOk;
    }

    if (opt->parsed()) {
      const io::RunConfig config = opt_cfg.load();
      const auto best = optimizer::optimize_lambda(config.rate, config.rate_lambda_min, config.rate_lambda_max,
                                                   config.rate_duration);
      const std::string csv = rate_csv(rate_table(config));
      write_text_or_stdout(opt_out, csv, out);
      (opt_out.empty() || opt_out == "-" ? err : out)
          << "lambda_star=" << format_g(best.lambda) << " rate_bps=" << format_g(best.rate) << '\n';
      return kExitOk;
    }

    if (ts->parsed()) {
      const BitVector bits = io::read_certified_bits(ts_bits);
      const auto reports = stats::run_battery(bits, ts_alpha);
      write_text_or_stdout(ts_out, stats_csv(reports), out);
      return exit_for_stats(reports, ts_max_failures, err);
    }

    if (pipe->parsed()) {
      const io::RunConfig config = pipe_cfg.load();
      const fs::path dir = pipe_dir.empty() ? config.output_dir : fs::path(pipe_dir);
      const fs::path seed_path = pipe_seed.empty() ? config.seed_path : fs::path(pipe_seed);
      if (dir.empty()) throw ConfigError("no output directory: pass --out-dir or set paths.output");
      if (seed_path.empty()) throw ConfigError("no extractor seed: pass --seed-file or set paths.seed");
      fs::create_directories(dir);

      const auto events = simulate(config);
      write_events(dir / (config.event_format == io::EventFormat::text ? "events.txt" : "events.bin"), events, config,
                   config.event_format);

      const io::TallyFile tally = make_tally_file(events, config);
      io::write_file_atomic(dir / "tally.txt", std::string_view(io::format_tally(tally)));

      const auto estimate = run_estimate(tally, config, nullptr);
      io::write_file_atomic(dir / "estimate.txt", std::string_view(io::format_estimate(estimate)));
      report_estimate(estimate, err);
      if (estimate.aborted()) return kExitAbort;

      const auto extraction = run_extract(events, estimate, seed_path);
      io::write_certified_bits(dir / "bits.bin", extraction.bits, std::exp2(estimate.security.log2_epsilon_total));

      io::write_file_atomic(dir / "rate.csv", std::string_view(rate_csv(rate_table(config))));

      const auto reports = stats::run_battery(extraction.bits, config.alpha);
      io::write_file_atomic(dir / "stats.csv", std::string_view(stats_csv(reports)));

      out << "e_bx=" << format_g(estimate.e_bx_observed) << " r_final=" << format_g(estimate.rates.r_final)
          << " bits=" << extraction.bits.size() << " failed_tests=" << stats::count_failures(reports) << '\n';
      return exit_for_stats(reports, pipe_max_failures, err);
    }

    if (conv->parsed()) {
      const auto file = io::read_events(conv_in);
      if (conv_format == "text") io::write_events_text(conv_out, file.events, file.metadata);
      else io::write_events_binary(conv_out, file.events);
      return kExitOk;
    }

    if (mks->parsed()) {
      std::vector<std::uint8_t> bytes(seed_bytes);
      if (seed_opt->count() > 0) {
        CounterRng rng(seed_value, 0, Stream::test);
        for (auto& b : bytes) b = static_cast<std::uint8_t>(rng() >> 56);
      } else {
        std::random_device rd;
        for (auto& b : bytes) b = static_cast<std::uint8_t>(rd());
      }
      io::write_file_atomic(seed_out, std::span<const std::uint8_t>(bytes));
      return kExitOk;
    }
  } catch (const EstimationAbort& e) {
    err << "abort: " << e.what() << '\n';
    return kExitAbort;
  } catch (const EmptyTallyError& e) {
    err << "abort: " << e.what() << '\n';
    return kExitAbort;
  } catch (const UnreachableTarget& e) {
    err << "abort: " << e.what() << '\n';
    return kExitAbort;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const LengthMismatch& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const InsufficientBits& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace siqrng
