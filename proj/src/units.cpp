#include "netrawalm/units.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace netrawalm {

namespace {

struct Suffix {
  std::string_view text;
  double factor;
};

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Splits "2.37GHz" into (2.37, "ghz").
std::pair<double, std::string> split_number(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size() && (std::isdigit(static_cast<unsigned char>(text[i])) || text[i] == '.')) ++i;
  if (i == 0) throw std::invalid_argument("expected a number in '" + std::string(text) + "'");
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + i, value);
  if (ec != std::errc{} || ptr != text.data() + i) {
    throw std::invalid_argument("malformed number in '" + std::string(text) + "'");
  }
  return {value, lowercase(text.substr(i))};
}

template <std::size_t N>
double scaled(std::string_view text, const std::array<Suffix, N>& suffixes, std::string_view what) {
  auto [value, unit] = split_number(text);
  for (const auto& s : suffixes) {
    if (unit == s.text) return value * s.factor;
  }
  throw std::invalid_argument("unknown " + std::string(what) + " unit '" + unit + "' in '" +
                              std::string(text) + "'");
}

std::uint64_t to_integer(double v, std::string_view text) {
  if (!std::isfinite(v) || v < 0 || v > 1.8e19) {
    throw std::invalid_argument("quantity out of range: '" + std::string(text) + "'");
  }
  return static_cast<std::uint64_t>(std::llround(v));
}

std::string trim_number(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

template <std::size_t N>
std::string format_scaled(std::uint64_t v, const std::array<Suffix, N>& units) {
  // Largest unit that divides exactly, so formatting round-trips.
  for (const auto& u : units) {
    auto f = static_cast<std::uint64_t>(u.factor);
    if (f > 1 && v % f == 0 && v != 0) return std::to_string(v / f) + std::string(u.text);
  }
  return std::to_string(v) + std::string(units.back().text);
}

}  // namespace

std::uint64_t parse_bytes(std::string_view text) {
  static constexpr std::array<Suffix, 5> kUnits{{
      {"", 1.0}, {"b", 1.0}, {"kb", 1024.0}, {"mb", 1024.0 * 1024.0}, {"gb", 1024.0 * 1024.0 * 1024.0}}};
  return to_integer(scaled(text, kUnits, "memory"), text);
}

std::uint64_t parse_hertz(std::string_view text) {
  static constexpr std::array<Suffix, 5> kUnits{{{"", 1.0}, {"hz", 1.0}, {"khz", 1e3}, {"mhz", 1e6}, {"ghz", 1e9}}};
  return to_integer(scaled(text, kUnits, "frequency"), text);
}

std::uint64_t parse_bits_per_second(std::string_view text) {
  static constexpr std::array<Suffix, 5> kUnits{{{"", 1.0}, {"bps", 1.0}, {"kbps", 1e3}, {"mbps", 1e6}, {"gbps", 1e9}}};
  return to_integer(scaled(text, kUnits, "bandwidth"), text);
}

DelayUs parse_duration(std::string_view text) {
  static constexpr std::array<Suffix, 4> kUnits{{{"", 1e3}, {"us", 1.0}, {"ms", 1e3}, {"s", 1e6}}};
  return static_cast<DelayUs>(to_integer(scaled(text, kUnits, "time"), text));
}

std::string format_bytes(std::uint64_t bytes) {
  static constexpr std::array<Suffix, 4> kUnits{
      {{"GB", 1024.0 * 1024.0 * 1024.0}, {"MB", 1024.0 * 1024.0}, {"KB", 1024.0}, {"B", 1.0}}};
  return format_scaled(bytes, kUnits);
}

std::string format_hertz(std::uint64_t hz) {
  static constexpr std::array<Suffix, 4> kUnits{{{"GHz", 1e9}, {"MHz", 1e6}, {"KHz", 1e3}, {"Hz", 1.0}}};
  return format_scaled(hz, kUnits);
}

std::string format_bits_per_second(std::uint64_t bps) {
  static constexpr std::array<Suffix, 4> kUnits{{{"Gbps", 1e9}, {"Mbps", 1e6}, {"kbps", 1e3}, {"bps", 1.0}}};
  return format_scaled(bps, kUnits);
}

std::string format_duration(DelayUs us) {
  if (us < 0) throw std::invalid_argument("negative duration");
  static constexpr std::array<Suffix, 3> kUnits{{{"s", 1e6}, {"ms", 1e3}, {"us", 1.0}}};
  return format_scaled(static_cast<std::uint64_t>(us), kUnits);
}

std::string format_millis(DelayUs us) {
  const bool negative = us < 0;
  const auto a = static_cast<std::uint64_t>(negative ? -us : us);
  std::string frac = std::to_string(a % 1000);
  frac.insert(0, 3 - frac.size(), '0');
  return (negative ? "-" : "") + std::to_string(a / 1000) + "." + frac;
}

}  // namespace netrawalm
