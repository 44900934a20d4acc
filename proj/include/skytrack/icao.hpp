#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace skytrack {

/// ICAO 24-bit transponder address. The all-zero and all-one words are
/// reserved, which leaves 2^24 - 2 assignable values.
class Icao24 {
 public:
  static constexpr std::uint32_t kMin = 0x000001;
  static constexpr std::uint32_t kMax = 0xFFFFFE;

  constexpr Icao24() = default;

  /// Throws std::out_of_range outside [kMin, kMax].
  static Icao24 from_value(std::uint32_t value);

  /// Accepts exactly six hex digits (either case, surrounding blanks ignored).
  static std::optional<Icao24> parse(std::string_view text);

  constexpr std::uint32_t value() const { return value_; }
  constexpr bool valid() const { return value_ >= kMin && value_ <= kMax; }

  /// Six uppercase hex digits.
  std::string str() const;

  constexpr auto operator<=>(const Icao24&) const = default;

 private:
  constexpr explicit Icao24(std::uint32_t v) : value_(v) {}
  std::uint32_t value_ = 0;
};

/// Six uppercase hex digits for any 24-bit word (range bounds may be 0xFFFFFF).
std::string format_hex24(std::uint32_t value);

}  // namespace skytrack

template <>
struct std::hash<skytrack::Icao24> {
  std::size_t operator()(const skytrack::Icao24& a) const noexcept { return a.value(); }
};
