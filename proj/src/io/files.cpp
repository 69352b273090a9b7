#include "siqrng/io/files.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <sstream>

#include "siqrng/errors.hpp"

namespace siqrng::io {
namespace {

using detector::Basis;
using detector::EventStream;
using detector::Outcome;

constexpr std::string_view kTextMagic = "#SIQRNG-EVENTS v1";
constexpr std::string_view kTextHeader = "index,basis,outcome";
constexpr std::uint8_t kBinaryMagic[4] = {'S', 'Q', 'E', 'B'};
constexpr std::uint8_t kBinaryVersion = 0x01;

char outcome_letter(Outcome o) {
  switch (o) {
    case Outcome::none: return 'N';
    case Outcome::d0: return 'A';
    case Outcome::d1: return 'B';
    case Outcome::both: return 'D';
  }
  return '?';
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
T parse_number(std::string_view s, std::string_view what) {
  T out{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw FormatError(std::string(what) + ": bad number '" + std::string(s) + "'");
  return out;
}

/// key=value lines into a map; blank lines and '#' lines skipped.
std::map<std::string, std::string, std::less<>> parse_key_values(std::string_view text, std::string_view what) {
  std::map<std::string, std::string, std::less<>> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError(std::string(what) + ": line without '=': " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

}  // namespace

std::string format_events_text(const EventStream& events, const Metadata& metadata) {
  std::string out;
  out.reserve(64 + events.size() * 12);
  out += kTextMagic;
  out += '\n';
  for (const auto& [k, v] : metadata) {
    if (k.find_first_of("=\n") != std::string::npos || v.find('\n') != std::string::npos)
      throw FormatError("event metadata keys may not contain '=' or newlines");
    out += '#';
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  out += kTextHeader;
  out += '\n';
  char buf[32];
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto e = events[i];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, e.index);
    out.append(buf, end);
    out += ',';
    out += e.basis == Basis::X ? 'X' : 'Z';
    out += ',';
    out += outcome_letter(e.outcome);
    out += '\n';
  }
  return out;
}

std::vector<std::uint8_t> format_events_binary(const EventStream& events) {
  if (events.first_index() != 0) throw FormatError("binary event files start at index 0");
  std::vector<std::uint8_t> out(4 + 1 + 8 + events.size());
  std::memcpy(out.data(), kBinaryMagic, 4);
  out[4] = kBinaryVersion;
  const std::uint64_t count = events.size();
  for (int b = 0; b < 8; ++b) out[5 + b] = static_cast<std::uint8_t>(count >> (8 * b));
  std::memcpy(out.data() + 13, events.codes().data(), events.size());
  return out;
}

EventFile parse_events_text(std::string_view text) {
  EventFile file;
  std::size_t line_no = 0;
  auto next_line = [&](std::string_view& line) {
    if (text.empty()) return false;
    const auto nl = text.find('\n');
    line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    return true;
  };
  auto fail = [&](const std::string& msg) -> void {
    throw FormatError("event file line " + std::to_string(line_no) + ": " + msg);
  };

  std::string_view line;
  if (!next_line(line) || line != kTextMagic) fail("missing '#SIQRNG-EVENTS v1' magic line");
  while (true) {
    if (!next_line(line)) fail("missing header line");
    if (line.empty() || line.front() != '#') break;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail("metadata line without '='");
    file.metadata.emplace(std::string(line.substr(1, eq - 1)), std::string(line.substr(eq + 1)));
  }
  if (line != kTextHeader) fail("expected header 'index,basis,outcome'");

  std::vector<std::uint8_t> codes;
  codes.reserve(text.size() / 12);
  while (next_line(line)) {
    const auto c1 = line.find(',');
    if (c1 == std::string_view::npos || line.size() != c1 + 4 || line[c1 + 2] != ',') fail("malformed record");
    std::uint64_t index = 0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + c1, index);
    if (ec != std::errc{} || ptr != line.data() + c1) fail("bad index");
    if (index != codes.size()) fail("indices must be consecutive from 0");
    Basis basis;
    switch (line[c1 + 1]) {
      case 'X': basis = Basis::X; break;
      case 'Z': basis = Basis::Z; break;
      default: fail("basis must be X or Z"); return file;
    }
    Outcome outcome;
    switch (line[c1 + 3]) {
      case 'N': outcome = Outcome::none; break;
      case 'A': outcome = Outcome::d0; break;
      case 'B': outcome = Outcome::d1; break;
      case 'D': outcome = Outcome::both; break;
      default: fail("outcome must be N, A, B or D"); return file;
    }
    codes.push_back(detector::encode(basis, outcome));
  }
  file.events = EventStream(std::move(codes));
  return file;
}

EventFile parse_events_binary(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 13 || std::memcmp(bytes.data(), kBinaryMagic, 4) != 0)
    throw FormatError("binary event file: bad magic");
  if (bytes[4] != kBinaryVersion) throw FormatError("binary event file: unsupported version");
  std::uint64_t count = 0;
  for (int b = 0; b < 8; ++b) count |= static_cast<std::uint64_t>(bytes[5 + b]) << (8 * b);
  if (bytes.size() - 13 != count) throw FormatError("binary event file: record count does not match file size");
  std::vector<std::uint8_t> codes(bytes.begin() + 13, bytes.end());
  for (const std::uint8_t c : codes)
    if (c & 0xF8u) throw FormatError("binary event file: reserved bits set");
  EventFile file;
  file.events = EventStream(std::move(codes));
  return file;
}

EventFile parse_events(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kBinaryMagic, 4) == 0) return parse_events_binary(bytes);
  return parse_events_text(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

EventFile read_events(const std::filesystem::path& path) { return parse_events(read_file(path)); }

void write_events_text(const std::filesystem::path& path, const EventStream& events, const Metadata& metadata) {
  write_file_atomic(path, format_events_text(events, metadata));
}

void write_events_binary(const std::filesystem::path& path, const EventStream& events) {
  write_file_atomic(path, std::span<const std::uint8_t>(format_events_binary(events)));
}

std::string format_tally(const TallyFile& file) {
  const auto& t = file.tally;
  std::ostringstream out;
  out << "n_total=" << t.n_total << '\n'
      << "n_x_pulses=" << t.n_x_pulses << '\n'
      << "n_z_pulses=" << t.n_z_pulses << '\n'
      << "n_x=" << t.n_x << '\n'
      << "n_z=" << t.n_z << '\n'
      << "x_wrong_singles=" << t.x_wrong_singles << '\n'
      << "x_doubles=" << t.x_doubles << '\n'
      << "z_doubles_discarded=" << t.z_doubles_discarded << '\n';
  if (t.n_x > 0) out << "e_bx=" << fmt_double(t.error_rate_x()) << '\n';
  if (file.duration_s > 0.0) out << "duration_s=" << fmt_double(file.duration_s) << '\n';
  if (file.prob_x >= 0.0) out << "prob_x=" << fmt_double(file.prob_x) << '\n';
  return out.str();
}

TallyFile parse_tally(std::string_view text) {
  const auto kv = parse_key_values(text, "tally file");
  TallyFile file;
  auto& t = file.tally;
  const std::pair<const char*, std::uint64_t*> required[] = {
      {"n_total", &t.n_total},     {"n_x_pulses", &t.n_x_pulses},
      {"n_z_pulses", &t.n_z_pulses}, {"n_x", &t.n_x},
      {"n_z", &t.n_z},             {"x_wrong_singles", &t.x_wrong_singles},
      {"x_doubles", &t.x_doubles}, {"z_doubles_discarded", &t.z_doubles_discarded},
  };
  for (const auto& [key, slot] : required) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw FormatError(std::string("tally file: missing key ") + key);
    *slot = parse_number<std::uint64_t>(it->second, key);
  }
  for (const auto& [key, value] : kv) {
    if (key == "duration_s") file.duration_s = parse_number<double>(value, key);
    else if (key == "prob_x") file.prob_x = parse_number<double>(value, key);
    else if (key == "e_bx") continue;
    else if (std::none_of(std::begin(required), std::end(required), [&](const auto& r) { return key == r.first; }))
      throw FormatError("tally file: unknown key " + key);
  }
  if (t.n_x > t.n_x_pulses || t.n_z + t.z_doubles_discarded > t.n_z_pulses || t.n_x_pulses + t.n_z_pulses != t.n_total ||
      t.x_wrong_singles + t.x_doubles > t.n_x)
    throw FormatError("tally file: inconsistent counts");
  return file;
}

std::string format_estimate(const protocol::Estimate& est) {
  std::ostringstream out;
  const auto& r = est.rates;
  const auto& s = est.security;
  out << "r0=" << fmt_double(r.r0) << '\n'
      << "r1=" << fmt_double(r.r1) << '\n'
      << "r_final=" << fmt_double(r.r_final) << '\n'
      << "extractable_bits=" << (est.aborted() ? 0 : static_cast<std::uint64_t>(std::floor(r.r_final))) << '\n'
      << "rescale_factor=" << fmt_double(r.rescale_factor) << '\n'
      << "entropy_cost=" << fmt_double(r.entropy_cost) << '\n'
      << "coefficient=" << fmt_double(r.coefficient) << '\n'
      << "overlap_c=" << fmt_double(est.overlap_c) << '\n'
      << "theta=" << fmt_double(s.theta) << '\n'
      << "t_e=" << fmt_double(s.t_e) << '\n'
      << "log2_epsilon_theta=" << fmt_double(s.log2_epsilon_theta) << '\n'
      << "log2_epsilon_total=" << fmt_double(s.log2_epsilon_total) << '\n'
      << "epsilon_total=" << fmt_double(std::exp2(s.log2_epsilon_total)) << '\n'
      << "e_bx=" << fmt_double(est.e_bx_observed) << '\n'
      << "e_bx_bound=" << fmt_double(est.e_bx_bound) << '\n'
      << "q_x=" << fmt_double(est.q_x) << '\n'
      << "n_detected=" << fmt_double(est.n_detected) << '\n'
      << "rate_bps=" << fmt_double(est.rate_bps) << '\n'
      << "basis_ratio_mismatch=" << (est.basis_ratio_mismatch ? 1 : 0) << '\n'
      << "aborted=" << (est.aborted() ? 1 : 0) << '\n';
  return out.str();
}

protocol::Estimate parse_estimate(std::string_view text) {
  const auto kv = parse_key_values(text, "estimate file");
  auto get = [&](const char* key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw FormatError(std::string("estimate file: missing key ") + key);
    return parse_number<double>(it->second, key);
  };
  protocol::Estimate est;
  est.rates.r0 = get("r0");
  est.rates.r1 = get("r1");
  est.rates.r_final = get("r_final");
  est.rates.rescale_factor = get("rescale_factor");
  est.rates.entropy_cost = get("entropy_cost");
  est.rates.coefficient = get("coefficient");
  est.overlap_c = get("overlap_c");
  est.security.theta = get("theta");
  est.security.t_e = get("t_e");
  est.security.log2_epsilon_theta = get("log2_epsilon_theta");
  est.security.log2_epsilon_total = get("log2_epsilon_total");
  est.e_bx_observed = get("e_bx");
  est.e_bx_bound = get("e_bx_bound");
  est.q_x = get("q_x");
  est.n_detected = get("n_detected");
  est.rate_bps = get("rate_bps");
  est.basis_ratio_mismatch = get("basis_ratio_mismatch") != 0.0;
  return est;
}

void write_certified_bits(const std::filesystem::path& path, const BitVector& bits, double epsilon) {
  write_file_atomic(path, std::span<const std::uint8_t>(bits.to_bytes_msb()));
  char buf[96];
  std::snprintf(buf, sizeof buf, "%zu\n%.6e\n", bits.size(), epsilon);
  std::filesystem::path sidecar = path;
  sidecar += ".len";
  write_file_atomic(sidecar, std::string_view(buf));
}

BitsSidecar read_sidecar(const std::filesystem::path& bits_path) {
  std::filesystem::path sidecar = bits_path;
  sidecar += ".len";
  std::istringstream in(read_text_file(sidecar));
  std::string count;
  std::string eps;
  if (!(in >> count)) throw FormatError("bits sidecar: missing bit count");
  BitsSidecar out;
  out.n_bits = parse_number<std::uint64_t>(count, "bits sidecar count");
  if (in >> eps) out.epsilon = std::strtod(eps.c_str(), nullptr);
  return out;
}

BitVector read_certified_bits(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  const BitsSidecar side = read_sidecar(path);
  if (side.n_bits > bytes.size() * 8 || side.n_bits + 8 <= bytes.size() * 8)
    throw FormatError("bits file length does not match its sidecar");
  return BitVector::from_bytes_msb(bytes, side.n_bits);
}

BitVector read_seed_file(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return BitVector::from_bytes_msb(bytes, bytes.size() * 8);
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_text_file(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return {bytes.begin(), bytes.end()};
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw FormatError("cannot rename " + tmp.string() + ": " + ec.message());
}

void write_file_atomic(const std::filesystem::path& path, std::string_view text) {
  write_file_atomic(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace siqrng::io
