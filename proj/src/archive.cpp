#include "skytrack/archive.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>

#include "skytrack/error.hpp"
#include "skytrack/textio.hpp"
#include "skytrack/zip.hpp"

namespace skytrack {

namespace fs = std::filesystem;

namespace {

std::string read_plain(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw Error(ErrorKind::Input, "cannot read " + p.string());
  return std::string((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
}

IcaoRange range_from_archive(const fs::path& archive) {
  auto label = archive.filename().string();
  if (label.ends_with(".zip")) label.resize(label.size() - 4);
  auto r = IcaoRange::parse_label(label);
  if (!r) throw Error(ErrorKind::Input, "archive name is not a range label: " + archive.string());
  return *r;
}

void check_member_name(const std::string& name, const IcaoRange& range) {
  auto parsed = parse_organized_file_name(name);
  if (!parsed) throw Error(ErrorKind::Input, "not an organized hourly file: " + name);
  if (!range.contains(parsed->icao24))
    throw Error(ErrorKind::Input, name + " is outside range " + range.label());
}

LeafArchive describe(const fs::path& path, const IcaoRange& range, const std::vector<zip::Entry>& entries) {
  LeafArchive a;
  a.path = path;
  a.range = range;
  for (const auto& e : entries) a.members.push_back({e.name, e.size, e.crc32});
  std::sort(a.members.begin(), a.members.end(), [](const auto& x, const auto& y) { return x.name < y.name; });
  return a;
}

// Writes to <archive>.tmp, re-reads every member against the blobs, renames.
LeafArchive commit(const fs::path& archive, const IcaoRange& range, std::vector<zip::Blob> blobs,
                   const ArchiveOptions& opts) {
  std::sort(blobs.begin(), blobs.end(), [](const auto& x, const auto& y) { return x.entry.name < y.entry.name; });
  fs::path tmp = archive;
  tmp += ".tmp";
  try {
    zip::write(tmp, blobs, opts.afterMember);
    zip::Reader check = zip::Reader::open(tmp);
    if (check.entries().size() != blobs.size())
      throw Error(ErrorKind::Verification, "member count mismatch in " + tmp.string());
    for (std::size_t i = 0; i < blobs.size(); ++i) {
      const auto& got = check.entries()[i];
      const auto& want = blobs[i].entry;
      if (got.name != want.name || got.crc32 != want.crc32 || got.size != want.size)
        throw Error(ErrorKind::Verification, "member mismatch for " + want.name);
      check.extract(got);  // inflates and checks CRC
    }
  } catch (const Error& e) {
    std::error_code ec;
    fs::remove(tmp, ec);
    if (e.kind() == ErrorKind::CorruptArchive) throw Error(ErrorKind::Verification, e.what());
    throw;
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
  std::error_code ec;
  fs::rename(tmp, archive, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::Io, "cannot rename archive into place: " + archive.string());
  }
  std::vector<zip::Entry> entries;
  for (const auto& b : blobs) entries.push_back(b.entry);
  LeafArchive out = describe(archive, range, entries);
  text::write_file_atomic(manifest_path(archive), manifest_text(out));
  return out;
}

}  // namespace

fs::path manifest_path(const fs::path& archive) {
  fs::path p = archive;
  p += ".manifest";
  return p;
}

std::string manifest_text(const LeafArchive& a) {
  std::string out;
  char crc[16];
  for (const auto& m : a.members) {
    std::snprintf(crc, sizeof crc, "%08x", m.crc32);
    out += m.name + "\t" + std::to_string(m.size) + "\t" + crc + "\n";
  }
  return out;
}

LeafArchive read_archive(const fs::path& archive) {
  auto range = range_from_archive(archive);
  zip::Reader r = zip::Reader::open(archive);
  for (const auto& e : r.entries()) r.extract(e);
  return describe(archive, range, r.entries());
}

std::vector<ExtractedMember> extract_all(const fs::path& archive) {
  zip::Reader r = zip::Reader::open(archive);
  std::vector<ExtractedMember> out;
  for (const auto& e : r.entries()) out.push_back({e.name, r.extract(e)});
  return out;
}

void extract_to(const fs::path& archive, const fs::path& dir) {
  fs::create_directories(dir);
  for (auto& m : extract_all(archive)) {
    if (m.name.find('/') != std::string::npos || m.name.find("..") != std::string::npos)
      throw Error(ErrorKind::CorruptArchive, "refusing member path " + m.name);
    std::ofstream os(dir / m.name, std::ios::binary | std::ios::trunc);
    os.write(m.bytes.data(), static_cast<std::streamsize>(m.bytes.size()));
    if (!os) throw Error(ErrorKind::Io, "cannot write " + (dir / m.name).string());
  }
}

LeafArchive update_archive(const fs::path& archive, std::span<const fs::path> newFiles, const ArchiveOptions& opts) {
  auto range = range_from_archive(archive);
  std::map<std::string, zip::Blob> blobs;
  try {
    zip::Reader old = zip::Reader::open(archive);
    for (const auto& e : old.entries()) {
      old.extract(e);  // full check before trusting the raw bytes
      blobs[e.name] = zip::Blob{e, std::string(old.compressed(e))};
    }
  } catch (const Error& e) {
    throw Error(ErrorKind::CorruptArchive, "rebuild required for " + archive.string() + ": " + e.what());
  }
  for (const auto& f : newFiles) {
    auto name = f.filename().string();
    check_member_name(name, range);
    blobs[name] = zip::compress(name, read_plain(f), opts.level);
  }
  std::vector<zip::Blob> all;
  for (auto& [name, b] : blobs) all.push_back(std::move(b));
  return commit(archive, range, std::move(all), opts);
}

std::optional<LeafArchive> pack_leaf(const fs::path& leafDir, const fs::path& organizedRoot, const fs::path& archiveRoot,
                                     const ArchiveOptions& opts) {
  std::vector<fs::path> files;
  for (const auto& de : fs::directory_iterator(leafDir))
    if (de.is_regular_file()) files.push_back(de.path());
  if (files.empty()) return std::nullopt;
  std::sort(files.begin(), files.end());

  auto rel = fs::relative(leafDir, organizedRoot);
  auto range = IcaoRange::parse_label(rel.filename().string());
  if (!range) throw Error(ErrorKind::Input, "leaf directory is not a range label: " + leafDir.string());
  fs::path archive = archiveRoot / rel.parent_path() / (range->label() + ".zip");
  fs::create_directories(archive.parent_path());

  LeafArchive out;
  if (fs::exists(archive)) {
    out = update_archive(archive, files, opts);
  } else {
    std::vector<zip::Blob> blobs;
    for (const auto& f : files) {
      auto name = f.filename().string();
      check_member_name(name, *range);
      blobs.push_back(zip::compress(name, read_plain(f), opts.level));
    }
    out = commit(archive, *range, std::move(blobs), opts);
  }

  // archive verified; the loose copies can go
  for (const auto& f : files) fs::remove(f);
  std::error_code ec;
  fs::remove(leafDir, ec);  // only succeeds when empty
  return out;
}

std::vector<fs::path> find_leaf_dirs(const fs::path& organizedRoot) {
  std::vector<fs::path> out;
  if (!fs::is_directory(organizedRoot)) return out;
  for (auto it = fs::recursive_directory_iterator(organizedRoot); it != fs::recursive_directory_iterator(); ++it) {
    if (it.depth() == 3 && it->is_directory()) {
      it.disable_recursion_pending();
      for (const auto& de : fs::directory_iterator(it->path())) {
        if (de.is_regular_file()) {
          out.push_back(it->path());
          break;
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<fs::path> find_archives(const fs::path& archiveRoot) {
  std::vector<fs::path> out;
  if (!fs::is_directory(archiveRoot)) return out;
  for (const auto& de : fs::recursive_directory_iterator(archiveRoot))
    if (de.is_regular_file() && de.path().extension() == ".zip") out.push_back(de.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace skytrack
