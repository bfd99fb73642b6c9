#include "bear/manifest.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>

#include "bear/errors.hpp"

namespace bear {

namespace {
std::string format_double(double v, const char* fmt) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}
}  // namespace

void RunManifest::set(const std::string& key, const std::string& value) {
  if (key.empty() || key.find('=') != std::string::npos ||
      key.find('\n') != std::string::npos)
    throw ParameterError("manifest key must be non-empty and free of '=' and newlines");
  if (value.find('\n') != std::string::npos)
    throw ParameterError("manifest value must not contain newlines");
  for (auto& entry : entries_) {
    if (entry.first == key) {
      entry.second = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

void RunManifest::set_i64(const std::string& key, std::int64_t value) {
  set(key, std::to_string(value));
}

void RunManifest::set_u64(const std::string& key, std::uint64_t value) {
  set(key, std::to_string(value));
}

void RunManifest::set_f32(const std::string& key, float value) {
  set(key, format_double(value, "%.9g"));
}

void RunManifest::set_f64(const std::string& key, double value) {
  set(key, format_double(value, "%.17g"));
}

void RunManifest::set_bool(const std::string& key, bool value) {
  set(key, value ? "true" : "false");
}

void RunManifest::set_trace(const std::string& key, const std::vector<double>& values) {
  std::string joined;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) joined += ',';
    joined += format_double(values[i], "%.9g");
  }
  set(key, joined);
}

bool RunManifest::has(const std::string& key) const {
  for (const auto& entry : entries_)
    if (entry.first == key) return true;
  return false;
}

std::string RunManifest::get(const std::string& key) const {
  for (const auto& entry : entries_)
    if (entry.first == key) return entry.second;
  throw FormatError("manifest: missing key '" + key + "'");
}

std::string RunManifest::get_or(const std::string& key,
                                const std::string& fallback) const {
  for (const auto& entry : entries_)
    if (entry.first == key) return entry.second;
  return fallback;
}

std::int64_t RunManifest::get_i64(const std::string& key) const {
  const std::string v = get(key);
  errno = 0;
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (errno != 0 || end == v.c_str() || *end != '\0')
    throw FormatError("manifest: key '" + key + "' is not an integer: " + v);
  return x;
}

std::uint64_t RunManifest::get_u64(const std::string& key) const {
  const std::string v = get(key);
  errno = 0;
  char* end = nullptr;
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (errno != 0 || end == v.c_str() || *end != '\0')
    throw FormatError("manifest: key '" + key + "' is not an unsigned integer: " + v);
  return x;
}

float RunManifest::get_f32(const std::string& key) const {
  const std::string v = get(key);
  char* end = nullptr;
  const float x = std::strtof(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw FormatError("manifest: key '" + key + "' is not a float: " + v);
  return x;
}

double RunManifest::get_f64(const std::string& key) const {
  const std::string v = get(key);
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw FormatError("manifest: key '" + key + "' is not a double: " + v);
  return x;
}

bool RunManifest::get_bool(const std::string& key) const {
  const std::string v = get(key);
  if (v == "true") return true;
  if (v == "false") return false;
  throw FormatError("manifest: key '" + key + "' is not a bool: " + v);
}

void RunManifest::write(const std::filesystem::path& path) const {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw StorageError("cannot open " + tmp.string() + " for writing");
    for (const auto& [key, value] : entries_) out << key << '=' << value << '\n';
    out.flush();
    if (!out) throw StorageError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec)
    throw StorageError("cannot rename " + tmp.string() + " to " + path.string() +
                       ": " + ec.message());
}

RunManifest RunManifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw StorageError("cannot open " + path.string());
  RunManifest manifest;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw FormatError(path.string() + ":" + std::to_string(lineno) +
                        ": expected key=value");
    manifest.set(line.substr(0, eq), line.substr(eq + 1));
  }
  return manifest;
}

}  // namespace bear
