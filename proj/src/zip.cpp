#include "skytrack/zip.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>
#include <limits>

#include "skytrack/error.hpp"

namespace skytrack::zip {

namespace {

constexpr std::uint32_t kLocalSig = 0x04034b50;
constexpr std::uint32_t kCentralSig = 0x02014b50;
constexpr std::uint32_t kEndSig = 0x06054b50;
constexpr std::uint16_t kVersion = 20;
constexpr std::uint16_t kUtf8Flag = 0x0800;
constexpr std::uint16_t kDosTime = 0;      // 00:00:00
constexpr std::uint16_t kDosDate = 0x21;   // 1980-01-01

void put16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xFF));
  s.push_back(static_cast<char>(v >> 8));
}

void put32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint16_t get16(std::string_view s, std::size_t at) {
  if (at + 2 > s.size()) throw Error(ErrorKind::CorruptArchive, "truncated zip record");
  return static_cast<std::uint16_t>(static_cast<unsigned char>(s[at]) | (static_cast<unsigned char>(s[at + 1]) << 8));
}

std::uint32_t get32(std::string_view s, std::size_t at) {
  return static_cast<std::uint32_t>(get16(s, at)) | (static_cast<std::uint32_t>(get16(s, at + 2)) << 16);
}

std::string local_header(const Entry& e) {
  std::string h;
  put32(h, kLocalSig);
  put16(h, kVersion);
  put16(h, kUtf8Flag);
  put16(h, e.method);
  put16(h, kDosTime);
  put16(h, kDosDate);
  put32(h, e.crc32);
  put32(h, e.compressedSize);
  put32(h, e.size);
  put16(h, static_cast<std::uint16_t>(e.name.size()));
  put16(h, 0);
  h += e.name;
  return h;
}

}  // namespace

std::uint32_t crc32(std::string_view bytes) {
  uLong c = ::crc32(0L, Z_NULL, 0);
  const auto* p = reinterpret_cast<const Bytef*>(bytes.data());
  std::size_t left = bytes.size();
  while (left > 0) {
    auto n = static_cast<uInt>(std::min<std::size_t>(left, std::numeric_limits<uInt>::max()));
    c = ::crc32(c, p, n);
    p += n;
    left -= n;
  }
  return static_cast<std::uint32_t>(c);
}

Blob compress(std::string name, std::string_view bytes, int level) {
  if (bytes.size() > std::numeric_limits<std::uint32_t>::max())
    throw Error(ErrorKind::Io, "member too large for a non-zip64 archive: " + name);
  Blob b;
  b.entry.name = std::move(name);
  b.entry.crc32 = crc32(bytes);
  b.entry.size = static_cast<std::uint32_t>(bytes.size());

  z_stream zs{};
  if (deflateInit2(&zs, level, Z_DEFLATED, -MAX_WBITS, 8, Z_DEFAULT_STRATEGY) != Z_OK)
    throw Error(ErrorKind::Io, "deflateInit failed");
  std::string out(deflateBound(&zs, static_cast<uLong>(bytes.size())), '\0');
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(bytes.data()));
  zs.avail_in = static_cast<uInt>(bytes.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  int rc = deflate(&zs, Z_FINISH);
  out.resize(zs.total_out);
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) throw Error(ErrorKind::Io, "deflate failed for " + b.entry.name);

  if (out.size() < bytes.size()) {
    b.entry.method = kDeflate;
    b.compressed = std::move(out);
  } else {
    b.entry.method = kStored;
    b.compressed.assign(bytes);
  }
  b.entry.compressedSize = static_cast<std::uint32_t>(b.compressed.size());
  return b;
}

void write(const std::filesystem::path& path, std::span<const Blob> members,
           const std::function<void(std::size_t)>& afterMember) {
  if (members.size() >= 0xFFFF) throw Error(ErrorKind::Io, "too many members for a non-zip64 archive");
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorKind::Io, "cannot create " + path.string());

  std::uint64_t offset = 0;
  std::string central;
  for (std::size_t i = 0; i < members.size(); ++i) {
    Entry e = members[i].entry;
    if (offset > std::numeric_limits<std::uint32_t>::max()) throw Error(ErrorKind::Io, "archive exceeds 4 GiB");
    e.localOffset = static_cast<std::uint32_t>(offset);
    std::string h = local_header(e);
    os.write(h.data(), static_cast<std::streamsize>(h.size()));
    os.write(members[i].compressed.data(), static_cast<std::streamsize>(members[i].compressed.size()));
    offset += h.size() + members[i].compressed.size();

    put32(central, kCentralSig);
    put16(central, static_cast<std::uint16_t>(kVersion | (3 << 8)));  // made by: unix
    put16(central, kVersion);
    put16(central, kUtf8Flag);
    put16(central, e.method);
    put16(central, kDosTime);
    put16(central, kDosDate);
    put32(central, e.crc32);
    put32(central, e.compressedSize);
    put32(central, e.size);
    put16(central, static_cast<std::uint16_t>(e.name.size()));
    put16(central, 0);
    put16(central, 0);
    put16(central, 0);
    put16(central, 0);
    put32(central, 0100644u << 16);  // regular file, rw-r--r--
    put32(central, e.localOffset);
    central += e.name;

    if (!os) throw Error(ErrorKind::Io, "write failed for " + path.string());
    if (afterMember) {
      os.flush();
      afterMember(i);
    }
  }
  std::string end;
  put32(end, kEndSig);
  put16(end, 0);
  put16(end, 0);
  put16(end, static_cast<std::uint16_t>(members.size()));
  put16(end, static_cast<std::uint16_t>(members.size()));
  put32(end, static_cast<std::uint32_t>(central.size()));
  put32(end, static_cast<std::uint32_t>(offset));
  put16(end, 0);
  os.write(central.data(), static_cast<std::streamsize>(central.size()));
  os.write(end.data(), static_cast<std::streamsize>(end.size()));
  os.flush();
  if (!os) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

Reader::Reader(std::string bytes) : bytes_(std::move(bytes)) {
  std::string_view s = bytes_;
  if (s.size() < 22) throw Error(ErrorKind::CorruptArchive, "too short for a zip archive");
  // end record: scan back over a possible comment
  std::size_t end = std::string_view::npos;
  std::size_t lowest = s.size() >= 22 + 0xFFFF ? s.size() - 22 - 0xFFFF : 0;
  for (std::size_t at = s.size() - 22 + 1; at-- > lowest;) {
    if (get32(s, at) == kEndSig) {
      end = at;
      break;
    }
  }
  if (end == std::string_view::npos) throw Error(ErrorKind::CorruptArchive, "no end of central directory");
  std::uint16_t count = get16(s, end + 10);
  std::uint32_t cdSize = get32(s, end + 12);
  std::uint32_t cdOffset = get32(s, end + 16);
  if (static_cast<std::uint64_t>(cdOffset) + cdSize > end)
    throw Error(ErrorKind::CorruptArchive, "central directory out of bounds");

  std::size_t at = cdOffset;
  for (std::uint16_t i = 0; i < count; ++i) {
    if (get32(s, at) != kCentralSig) throw Error(ErrorKind::CorruptArchive, "bad central directory entry");
    Entry e;
    e.method = get16(s, at + 10);
    e.crc32 = get32(s, at + 16);
    e.compressedSize = get32(s, at + 20);
    e.size = get32(s, at + 24);
    std::uint16_t nameLen = get16(s, at + 28), extraLen = get16(s, at + 30), commentLen = get16(s, at + 32);
    e.localOffset = get32(s, at + 42);
    if (at + 46 + nameLen > end) throw Error(ErrorKind::CorruptArchive, "entry name out of bounds");
    e.name.assign(s.substr(at + 46, nameLen));
    if (e.method != kStored && e.method != kDeflate)
      throw Error(ErrorKind::CorruptArchive, "unsupported compression method in " + e.name);
    entries_.push_back(std::move(e));
    at += 46 + nameLen + extraLen + commentLen;
  }
  if (at != static_cast<std::size_t>(cdOffset) + cdSize)
    throw Error(ErrorKind::CorruptArchive, "central directory size mismatch");
}

Reader Reader::open(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::CorruptArchive, "cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return Reader(std::move(bytes));
}

std::string_view Reader::compressed(const Entry& e) const {
  std::string_view s = bytes_;
  if (get32(s, e.localOffset) != kLocalSig) throw Error(ErrorKind::CorruptArchive, "bad local header for " + e.name);
  std::size_t data = e.localOffset + 30 + get16(s, e.localOffset + 26) + get16(s, e.localOffset + 28);
  if (data + e.compressedSize > s.size()) throw Error(ErrorKind::CorruptArchive, "member data out of bounds: " + e.name);
  return s.substr(data, e.compressedSize);
}

std::string Reader::extract(const Entry& e) const {
  std::string_view src = compressed(e);
  std::string out;
  if (e.method == kStored) {
    out.assign(src);
  } else {
    out.resize(e.size);
    z_stream zs{};
    if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw Error(ErrorKind::CorruptArchive, "inflateInit failed");
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(src.data()));
    zs.avail_in = static_cast<uInt>(src.size());
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    int rc = inflate(&zs, Z_FINISH);
    std::size_t produced = zs.total_out;
    inflateEnd(&zs);
    if (rc != Z_STREAM_END || produced != e.size)
      throw Error(ErrorKind::CorruptArchive, "cannot inflate " + e.name);
  }
  if (out.size() != e.size || crc32(out) != e.crc32) throw Error(ErrorKind::CorruptArchive, "CRC mismatch in " + e.name);
  return out;
}

}  // namespace skytrack::zip
