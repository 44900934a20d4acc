#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace skytrack {

// Error classes double as the machine-parsable tag printed by the CLI.
enum class ErrorKind {
  Input,
  Config,
  Usage,
  Io,
  Geometry,
  CorruptTile,
  MissingTerrain,
  CorruptArchive,
  Verification,
  Network,
  Checksum,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Input: return "input";
    case ErrorKind::Config: return "config";
    case ErrorKind::Usage: return "usage";
    case ErrorKind::Io: return "io";
    case ErrorKind::Geometry: return "geometry";
    case ErrorKind::CorruptTile: return "corrupt-tile";
    case ErrorKind::MissingTerrain: return "missing-terrain";
    case ErrorKind::CorruptArchive: return "corrupt-archive";
    case ErrorKind::Verification: return "verification";
    case ErrorKind::Network: return "network";
    case ErrorKind::Checksum: return "checksum";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace skytrack
