#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "skytrack/timeutil.hpp"

namespace skytrack {

/// Replaces {date} with YYYY-MM-DD and {hour} with HH.
std::string expand_url(std::string_view urlTemplate, const CalendarDate& date, int hour);

std::string sha256_hex(std::string_view bytes);

struct FetchReport {
  std::vector<std::filesystem::path> downloaded;
  std::vector<std::filesystem::path> upToDate;
  std::vector<std::string> missing;         // remote hour absent
  std::vector<std::string> checksumFailed;  // discarded downloads
  std::vector<std::string> warnings;
};

/// Downloads the 24 hourly files of one day into <rawRoot>/<YYYY-MM-DD>/.
/// A local file whose size matches the remote Content-Length is kept. When
/// "<url>.sha256" exists remotely the download must match it. Throws
/// Error(Network) when the endpoint cannot be reached (safe to retry).
FetchReport fetch_day(const CalendarDate& date, std::string_view urlTemplate, const std::filesystem::path& rawRoot);

}  // namespace skytrack
