#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "skytrack/registry.hpp"

namespace skytrack {

struct ArchiveMember {
  std::string name;
  std::uint64_t size = 0;
  std::uint32_t crc32 = 0;

  bool operator==(const ArchiveMember&) const = default;
};

/// One zip per bottom-tier directory, at the mirrored first three tiers:
/// <archiveRoot>/<year>/<class>/<seat-or-hour>/<lo>_<hi>.zip
struct LeafArchive {
  std::filesystem::path path;
  IcaoRange range;
  std::vector<ArchiveMember> members;  // sorted by name

  std::size_t memberCount() const { return members.size(); }
};

struct ArchiveOptions {
  int level = 1;  // deflate level; text compresses well even at the fast end
  /// Test hook: runs after each member reaches the temp file.
  std::function<void(std::size_t)> afterMember;
};

/// Packs the loose hourly files of `leafDir` (a bottom-tier directory under
/// `organizedRoot`) into its archive, verifies it, then deletes the loose
/// files and the emptied directory. An existing archive is updated instead.
/// Empty directories produce no archive (nullopt). On verification failure
/// the loose files stay and Error(Verification) is thrown.
std::optional<LeafArchive> pack_leaf(const std::filesystem::path& leafDir, const std::filesystem::path& organizedRoot,
                                     const std::filesystem::path& archiveRoot, const ArchiveOptions& opts = {});

/// Adds or replaces members (same name: the new file wins). The new archive is
/// written to a temp name, verified, and renamed over the old one, so a
/// failure at any point leaves the previous archive intact. A damaged
/// existing archive raises Error(CorruptArchive): rebuild required.
LeafArchive update_archive(const std::filesystem::path& archive, std::span<const std::filesystem::path> newFiles,
                           const ArchiveOptions& opts = {});

/// Reads and fully verifies an archive (every member inflated and CRC-checked).
LeafArchive read_archive(const std::filesystem::path& archive);

struct ExtractedMember {
  std::string name;
  std::string bytes;
};
std::vector<ExtractedMember> extract_all(const std::filesystem::path& archive);
void extract_to(const std::filesystem::path& archive, const std::filesystem::path& dir);

/// "<name>\t<size>\t<crc32 hex>" per member.
std::string manifest_text(const LeafArchive& a);
std::filesystem::path manifest_path(const std::filesystem::path& archive);

/// Bottom-tier directories (depth four) that hold at least one regular file.
std::vector<std::filesystem::path> find_leaf_dirs(const std::filesystem::path& organizedRoot);
/// All "*.zip" files under `archiveRoot`, sorted.
std::vector<std::filesystem::path> find_archives(const std::filesystem::path& archiveRoot);

}  // namespace skytrack
