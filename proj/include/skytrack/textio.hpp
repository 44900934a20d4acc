#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace skytrack::text {

std::string_view trim(std::string_view s);
std::string lower(std::string_view s);

/// Splits one delimited record. Double quotes group fields and "" escapes a quote.
std::vector<std::string> split_record(std::string_view line, char delim);

/// Iterates lines (LF or CRLF) without copying.
class LineReader {
 public:
  explicit LineReader(std::string_view data) : data_(data) {}
  bool next(std::string_view& line);

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

/// Empty (after trim) -> nullopt; otherwise throws nothing, returns nullopt when
/// the field is not a finite number.
std::optional<double> parse_double(std::string_view field);
std::optional<long long> parse_int(std::string_view field);
std::optional<bool> parse_bool(std::string_view field);

/// Shortest round-trip text for a double.
std::string fmt(double v);
/// Fixed-point text with `digits` decimals.
std::string fmt_fixed(double v, int digits);

/// Whole file as bytes; gzip members are inflated transparently.
/// Throws Error(Input) when unreadable.
std::string read_file(const std::filesystem::path& p);

/// Write to a sibling temp name then rename over the target.
void write_file_atomic(const std::filesystem::path& p, std::string_view bytes);

}  // namespace skytrack::text
