#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace bear {

// Flat key=value run record written next to every command's outputs. Numeric
// values are printed with enough digits to round-trip exactly, so replaying a
// manifest reproduces the run bit for bit (single-threaded).
class RunManifest {
 public:
  void set(const std::string& key, const std::string& value);
  void set_i64(const std::string& key, std::int64_t value);
  void set_u64(const std::string& key, std::uint64_t value);
  void set_f32(const std::string& key, float value);    // %.9g round-trips
  void set_f64(const std::string& key, double value);   // %.17g round-trips
  void set_bool(const std::string& key, bool value);
  void set_trace(const std::string& key, const std::vector<double>& values);

  bool has(const std::string& key) const;
  // Throw FormatError when the key is missing or malformed.
  std::string get(const std::string& key) const;
  std::int64_t get_i64(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  float get_f32(const std::string& key) const;
  double get_f64(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  std::string get_or(const std::string& key, const std::string& fallback) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }

  // Writes to path atomically (temp file + rename).
  void write(const std::filesystem::path& path) const;
  static RunManifest load(const std::filesystem::path& path);

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace bear
