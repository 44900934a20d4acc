#include "skytrack/icao.hpp"

#include <charconv>
#include <stdexcept>

#include "skytrack/textio.hpp"

namespace skytrack {

Icao24 Icao24::from_value(std::uint32_t value) {
  if (value < kMin || value > kMax) throw std::out_of_range("ICAO24 value out of range: " + format_hex24(value));
  return Icao24(value);
}

std::optional<Icao24> Icao24::parse(std::string_view text) {
  text = text::trim(text);
  if (text.size() != 6) return std::nullopt;
  std::uint32_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v, 16);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  if (v < kMin || v > kMax) return std::nullopt;
  return Icao24(v);
}

std::string Icao24::str() const { return format_hex24(value_); }

std::string format_hex24(std::uint32_t value) {
  static constexpr char kDigits[] = "0123456789ABCDEF";
  std::string out(6, '0');
  for (int i = 5; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[value & 0xF];
    value >>= 4;
  }
  return out;
}

}  // namespace skytrack
