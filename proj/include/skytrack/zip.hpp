#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Minimal zip container (stored/deflate, no zip64) over zlib.
namespace skytrack::zip {

inline constexpr std::uint16_t kStored = 0;
inline constexpr std::uint16_t kDeflate = 8;

struct Entry {
  std::string name;
  std::uint16_t method = kDeflate;
  std::uint32_t crc32 = 0;
  std::uint32_t compressedSize = 0;
  std::uint32_t size = 0;
  std::uint32_t localOffset = 0;
};

/// A member ready to be written: metadata plus its compressed bytes.
struct Blob {
  Entry entry;
  std::string compressed;
};

std::uint32_t crc32(std::string_view bytes);

/// Deflates `bytes` (falls back to stored when that is not smaller).
Blob compress(std::string name, std::string_view bytes, int level);

/// Streams members to `path` in order, calling `afterMember(i)` once member i
/// is on disk. Members are written with a fixed timestamp so identical input
/// produces identical archives. Throws Error(Io) / whatever the hook throws.
void write(const std::filesystem::path& path, std::span<const Blob> members,
           const std::function<void(std::size_t)>& afterMember = {});

/// Parsed central directory over an in-memory archive.
class Reader {
 public:
  /// Throws Error(CorruptArchive) when the end record or central directory is damaged.
  explicit Reader(std::string bytes);
  static Reader open(const std::filesystem::path& path);

  const std::vector<Entry>& entries() const { return entries_; }
  std::string_view compressed(const Entry& e) const;
  /// Inflates and checks size and CRC; Error(CorruptArchive) on mismatch.
  std::string extract(const Entry& e) const;

 private:
  std::string bytes_;
  std::vector<Entry> entries_;
};

}  // namespace skytrack::zip
