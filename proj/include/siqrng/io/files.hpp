#pragma once

// On-disk formats. Event files come in a text and a binary form:
//
//   text:   #SIQRNG-EVENTS v1
//           #key=value            (zero or more metadata lines)
//           index,basis,outcome
//           <u64>,<X|Z>,<N|A|B|D>
//
//   binary: "SQEB", 0x01, u64 little-endian record count, then one byte per
//           event: bit0 basis (0 Z, 1 X), bits1-2 outcome (0 N, 1 A, 2 B, 3 D).
//
// Certified bits are raw bytes, MSB first, with a `<name>.len` sidecar holding
// the bit count and the security epsilon.

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "siqrng/bits.hpp"
#include "siqrng/detector_sim.hpp"
#include "siqrng/estimation.hpp"

namespace siqrng::io {

using Metadata = std::map<std::string, std::string>;

struct EventFile {
  detector::EventStream events;
  Metadata metadata;  ///< text form only
};

std::string format_events_text(const detector::EventStream& events, const Metadata& metadata = {});
std::vector<std::uint8_t> format_events_binary(const detector::EventStream& events);

EventFile parse_events_text(std::string_view text);
EventFile parse_events_binary(std::span<const std::uint8_t> bytes);
/// Detects the form from the leading bytes.
EventFile parse_events(std::span<const std::uint8_t> bytes);

EventFile read_events(const std::filesystem::path& path);
void write_events_text(const std::filesystem::path& path, const detector::EventStream& events,
                       const Metadata& metadata = {});
void write_events_binary(const std::filesystem::path& path, const detector::EventStream& events);

/// Tally as `key=value` lines; extra keys (duration_s, prob_x) travel along.
struct TallyFile {
  protocol::TallySummary tally;
  double duration_s = 0.0;
  double prob_x = -1.0;
};
std::string format_tally(const TallyFile& file);
TallyFile parse_tally(std::string_view text);

std::string format_estimate(const protocol::Estimate& est);
/// Reads back the fields extract needs (rates, security, abort flag).
protocol::Estimate parse_estimate(std::string_view text);

struct BitsSidecar {
  std::uint64_t n_bits = 0;
  double epsilon = 0.0;
};
void write_certified_bits(const std::filesystem::path& path, const BitVector& bits, double epsilon);
BitVector read_certified_bits(const std::filesystem::path& path);
BitsSidecar read_sidecar(const std::filesystem::path& bits_path);

/// Whole seed file as bits, MSB first.
BitVector read_seed_file(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
/// Writes `<path>.tmp` then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

}  // namespace siqrng::io
