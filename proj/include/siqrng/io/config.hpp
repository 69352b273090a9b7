#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "siqrng/detector_sim.hpp"
#include "siqrng/estimation.hpp"
#include "siqrng/optimizer.hpp"
#include "siqrng/source_sim.hpp"

namespace siqrng::io {

enum class EventFormat { text, binary };

/// Every tunable of a run, addressed by flat dotted keys such as
/// `source.lambda` or `detector.eta0`. Defaults are the laser operating point.
struct RunConfig {
  source::SourceParams source;
  detector::DetectorParams detector;
  detector::MeasurementConfig measurement;
  protocol::EstimateOptions security;
  optimizer::RateModelParams rate;
  double rate_lambda_min = 1.0;
  double rate_lambda_max = 40.0;
  double rate_lambda_step = 0.5;
  double rate_duration = 1800.0;

  std::uint64_t n_pulses = 10'000'000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  double duration = 0.0;  ///< 0: n_pulses / pulse_rate
  double alpha = 0.01;
  EventFormat event_format = EventFormat::binary;

  std::filesystem::path events_path;
  std::filesystem::path seed_path;
  std::filesystem::path output_dir;

  /// Keys assigned explicitly (file or override), in order.
  std::set<std::string> explicit_keys;

  double run_duration() const { return duration > 0.0 ? duration : static_cast<double>(n_pulses) / source.pulse_rate; }

  /// Applies one key; throws ConfigError on unknown keys or bad values.
  void set(std::string_view key, std::string_view value);
  /// Sunlight defaults for keys not set explicitly, then range checks.
  void finalize();

  static const std::vector<std::string>& known_keys();
};

/// `key = value` lines, `#` comments, blank lines ignored.
RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});
RunConfig parse_config(std::string_view text, const std::vector<std::string>& overrides = {});

}  // namespace siqrng::io
