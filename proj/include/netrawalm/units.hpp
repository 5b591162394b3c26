#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace netrawalm {

// Simulated time and link delays are integral microseconds so that delay sums
// and stretch ratios are exact.
using DelayUs = std::int64_t;
using SimTime = std::int64_t;

inline constexpr DelayUs kMicrosPerMilli = 1000;

// Human-readable quantity parsing. RAM suffixes are binary (1 KB = 1024 B),
// CPU and bandwidth suffixes are decimal. Throws std::invalid_argument on
// malformed input.
std::uint64_t parse_bytes(std::string_view text);
std::uint64_t parse_hertz(std::string_view text);
std::uint64_t parse_bits_per_second(std::string_view text);
// Bare numbers are milliseconds; accepts us, ms and s suffixes.
DelayUs parse_duration(std::string_view text);

std::string format_bytes(std::uint64_t bytes);
std::string format_hertz(std::uint64_t hz);
std::string format_bits_per_second(std::uint64_t bps);
std::string format_duration(DelayUs us);
// "12.345" style milliseconds with three decimals, used in logs.
std::string format_millis(DelayUs us);

}  // namespace netrawalm
