#include "skytrack/fetch.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <httplib.h>

#include "skytrack/error.hpp"
#include "skytrack/textio.hpp"

namespace skytrack {

namespace fs = std::filesystem;

std::string expand_url(std::string_view tmpl, const CalendarDate& date, int hour) {
  char hh[8];
  std::snprintf(hh, sizeof hh, "%02d", hour);
  std::string out(tmpl);
  auto replace_all = [&out](std::string_view key, const std::string& v) {
    for (auto pos = out.find(key); pos != std::string::npos; pos = out.find(key, pos + v.size()))
      out.replace(pos, key.size(), v);
  };
  replace_all("{date}", date.str());
  replace_all("{hour}", hh);
  return out;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr))
    throw Error(ErrorKind::Checksum, "sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xF];
  }
  return out;
}

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  auto scheme = url.find("://");
  if (scheme == std::string::npos) throw Error(ErrorKind::Config, "fetch url needs a scheme: " + url);
  auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

}  // namespace

FetchReport fetch_day(const CalendarDate& date, std::string_view urlTemplate, const fs::path& rawRoot) {
  FetchReport rep;
  const fs::path dir = rawRoot / date.str();
  for (int hour = 0; hour < 24; ++hour) {
    const std::string url = expand_url(urlTemplate, date, hour);
    auto [origin, path] = split_url(url);
    httplib::Client cli(origin);
    cli.set_connection_timeout(10);
    cli.set_read_timeout(120);
    cli.set_follow_location(true);
    const fs::path dest = dir / fs::path(path).filename();

    if (fs::exists(dest)) {
      auto head = cli.Head(path);
      if (!head) throw Error(ErrorKind::Network, "cannot reach " + origin + " (" + httplib::to_string(head.error()) + ")");
      if (head->status == 200 && head->has_header("Content-Length") &&
          head->get_header_value("Content-Length") == std::to_string(fs::file_size(dest))) {
        rep.upToDate.push_back(dest);
        continue;
      }
    }

    auto res = cli.Get(path);
    if (!res) throw Error(ErrorKind::Network, "cannot reach " + origin + " (" + httplib::to_string(res.error()) + ")");
    if (res->status != 200) {
      rep.missing.push_back(url);
      rep.warnings.push_back("hour " + std::to_string(hour) + " unavailable: HTTP " + std::to_string(res->status));
      continue;
    }
    if (auto sum = cli.Get(path + ".sha256"); sum && sum->status == 200) {
      auto expected = text::lower(text::trim(sum->body).substr(0, 64));
      if (expected != sha256_hex(res->body)) {
        rep.checksumFailed.push_back(url);
        rep.warnings.push_back("checksum mismatch, discarded " + url);
        continue;
      }
    }
    fs::create_directories(dir);
    text::write_file_atomic(dest, res->body);
    rep.downloaded.push_back(dest);
  }
  return rep;
}

}  // namespace skytrack
