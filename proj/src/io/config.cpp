#include "siqrng/io/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "siqrng/errors.hpp"

namespace siqrng::io {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError("config key '" + std::string(key) + "': not a number: '" + std::string(v) + "'");
  return out;
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
  // Accept integral scientific notation such as 1e7.
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec == std::errc{} && ptr == v.data() + v.size()) return out;
  const double d = to_double(key, v);
  if (d < 0.0 || d != std::floor(d) || d > 1.8e19)
    throw ConfigError("config key '" + std::string(key) + "': not a non-negative integer: '" + std::string(v) + "'");
  return static_cast<std::uint64_t>(d);
}

using Setter = std::function<void(RunConfig&, std::string_view key, std::string_view value)>;

Setter real(double RunConfig::*member) {
  return [member](RunConfig& c, std::string_view k, std::string_view v) { c.*member = to_double(k, v); };
}
template <typename Part>
Setter real(Part RunConfig::*part, double Part::*member) {
  return [part, member](RunConfig& c, std::string_view k, std::string_view v) { (c.*part).*member = to_double(k, v); };
}

const std::map<std::string, Setter, std::less<>>& setters() {
  using detector::DetectorParams;
  using optimizer::RateModelParams;
  using protocol::EstimateOptions;
  using source::SourceParams;
  static const std::map<std::string, Setter, std::less<>> table{
      {"source.kind",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         if (v == "laser") c.source.kind = source::SourceKind::laser;
         else if (v == "sunlight") c.source.kind = source::SourceKind::sunlight;
         else throw ConfigError("config key '" + std::string(k) + "': expected laser or sunlight");
       }},
      {"source.lambda", real(&RunConfig::source, &SourceParams::mean_photons)},
      {"source.pulse_rate", real(&RunConfig::source, &SourceParams::pulse_rate)},
      {"source.hwp_angle", real(&RunConfig::source, &SourceParams::hwp_angle_deg)},
      {"source.qwp_angle", real(&RunConfig::source, &SourceParams::qwp_angle_deg)},
      {"source.fluctuation", real(&RunConfig::source, &SourceParams::fluctuation_rel_std)},

      {"detector.eta0", real(&RunConfig::detector, &DetectorParams::eta0)},
      {"detector.eta1", real(&RunConfig::detector, &DetectorParams::eta1)},
      {"detector.dark_rate", real(&RunConfig::detector, &DetectorParams::dark_rate)},
      {"detector.dead_time", real(&RunConfig::detector, &DetectorParams::dead_time)},
      {"detector.gate_width", real(&RunConfig::detector, &DetectorParams::gate_width)},

      {"measurement.prob_x", real(&RunConfig::measurement, &detector::MeasurementConfig::prob_x)},
      {"measurement.phase_z_c",
       [](RunConfig& c, std::string_view k, std::string_view v) { c.measurement.phase_z.clockwise = to_double(k, v); }},
      {"measurement.phase_z_a",
       [](RunConfig& c, std::string_view k, std::string_view v) { c.measurement.phase_z.anticlockwise = to_double(k, v); }},
      {"measurement.phase_x_c",
       [](RunConfig& c, std::string_view k, std::string_view v) { c.measurement.phase_x.clockwise = to_double(k, v); }},
      {"measurement.phase_x_a",
       [](RunConfig& c, std::string_view k, std::string_view v) { c.measurement.phase_x.anticlockwise = to_double(k, v); }},
      {"measurement.basis_seed",
       [](RunConfig& c, std::string_view k, std::string_view v) { c.measurement.basis_seed = to_u64(k, v); }},

      {"security.theta", real(&RunConfig::security, &EstimateOptions::theta)},
      {"security.t_e", real(&RunConfig::security, &EstimateOptions::t_e)},
      {"security.coefficient", real(&RunConfig::security, &EstimateOptions::coefficient)},
      {"security.overlap_c", real(&RunConfig::security, &EstimateOptions::overlap_c)},
      {"security.epsilon_theta_target",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         const double target = to_double(k, v);
         if (target == 0.0) {
           c.security.log2_epsilon_theta_target.reset();
           return;
         }
         if (!(target > 0.0 && target <= 1.0)) throw ConfigError("security.epsilon_theta_target must lie in (0, 1]");
         c.security.log2_epsilon_theta_target = std::log2(target);
       }},
      {"security.log2_epsilon_theta_target",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         c.security.log2_epsilon_theta_target = to_double(k, v);
       }},

      {"rate.rep_rate", real(&RunConfig::rate, &RateModelParams::rep_rate)},
      {"rate.coefficient", real(&RunConfig::rate, &RateModelParams::coefficient)},
      {"rate.theta", real(&RunConfig::rate, &RateModelParams::theta)},
      {"rate.t_e", real(&RunConfig::rate, &RateModelParams::t_e)},
      {"rate.eta", real(&RunConfig::rate, &RateModelParams::eta)},
      {"rate.error_value", real(&RunConfig::rate, &RateModelParams::error_value)},
      {"rate.error_model",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         if (v == "constant") c.rate.error_model = optimizer::ErrorModel::constant;
         else if (v == "double_click") c.rate.error_model = optimizer::ErrorModel::double_click;
         else throw ConfigError("config key '" + std::string(k) + "': expected constant or double_click");
       }},
      {"rate.te_mode",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         if (v == "amortized") c.rate.te_mode = optimizer::TeMode::amortized;
         else if (v == "raw") c.rate.te_mode = optimizer::TeMode::raw;
         else throw ConfigError("config key '" + std::string(k) + "': expected amortized or raw");
       }},
      {"rate.lambda_min", real(&RunConfig::rate_lambda_min)},
      {"rate.lambda_max", real(&RunConfig::rate_lambda_max)},
      {"rate.lambda_step", real(&RunConfig::rate_lambda_step)},
      {"rate.duration", real(&RunConfig::rate_duration)},

      {"run.n_pulses", [](RunConfig& c, std::string_view k, std::string_view v) { c.n_pulses = to_u64(k, v); }},
      {"run.seed", [](RunConfig& c, std::string_view k, std::string_view v) { c.seed = to_u64(k, v); }},
      {"run.threads",
       [](RunConfig& c, std::string_view k, std::string_view v) { c.threads = static_cast<unsigned>(to_u64(k, v)); }},
      {"run.duration", real(&RunConfig::duration)},
      {"run.alpha", real(&RunConfig::alpha)},
      {"run.event_format",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         if (v == "text") c.event_format = EventFormat::text;
         else if (v == "binary") c.event_format = EventFormat::binary;
         else throw ConfigError("config key '" + std::string(k) + "': expected text or binary");
       }},

      {"paths.events", [](RunConfig& c, std::string_view, std::string_view v) { c.events_path = std::string(v); }},
      {"paths.seed", [](RunConfig& c, std::string_view, std::string_view v) { c.seed_path = std::string(v); }},
      {"paths.output", [](RunConfig& c, std::string_view, std::string_view v) { c.output_dir = std::string(v); }},
  };
  return table;
}

void apply_override(RunConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
  config.set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

}  // namespace

void RunConfig::set(std::string_view key, std::string_view value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
  it->second(*this, key, value);
  explicit_keys.emplace(key);
}

void RunConfig::finalize() {
  if (source.kind == source::SourceKind::sunlight) {
    if (!explicit_keys.contains("source.lambda")) source.mean_photons = source::SourceParams::sunlight().mean_photons;
    if (!explicit_keys.contains("source.fluctuation"))
      source.fluctuation_rel_std = source::SourceParams::sunlight().fluctuation_rel_std;
  }
  try {
    source.validate();
    detector.validate();
    measurement.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("run.alpha must lie in (0, 1)");
  if (!(rate_lambda_step > 0.0 && rate_lambda_max > rate_lambda_min && rate_lambda_min > 0.0))
    throw ConfigError("rate.lambda_min/max/step describe an empty grid");
  if (!(security.coefficient >= 0.0 && security.coefficient <= 1.0))
    throw ConfigError("security.coefficient must lie in [0, 1]");
  if (!(security.t_e >= 0.0)) throw ConfigError("security.t_e must be >= 0");
  if (!(security.theta >= 0.0 && security.theta < 1.0)) throw ConfigError("security.theta must lie in [0, 1)");
  security.eta0 = detector.eta0;
  security.eta1 = detector.eta1;
  security.prob_x = measurement.prob_x;
}

const std::vector<std::string>& RunConfig::known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& [k, _] : setters()) out.push_back(k);
    return out;
  }();
  return keys;
}

RunConfig parse_config(std::string_view text, const std::vector<std::string>& overrides) {
  RunConfig config;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    config.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  for (const auto& o : overrides) apply_override(config, o);
  config.finalize();
  return config;
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), overrides);
}

}  // namespace siqrng::io
