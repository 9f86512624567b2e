#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gclab {

// Render a double with 17 significant digits (%.17g): enough for an exact
// binary round-trip, so emitted CSVs are byte-stable across runs.
std::string format_full(double v);

// FNV-1a 64-bit hash; used to stamp outputs with their configuration.
std::uint64_t fnv1a64(std::string_view text);
std::string hex64(std::uint64_t v);

// Flat key=value configuration.
//
// File syntax: one `key = value` per line; '#' starts a comment; blank lines
// ignored.  List values are comma-separated.  The canonical text (keys
// sorted, exact value strings) feeds the config hash, so two configs hash
// equal iff they are the same mapping.
class Config {
 public:
  Config() = default;

  static Config from_file(const std::filesystem::path& path);
  static Config from_text(std::string_view text);

  void set(const std::string& key, std::string value);
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key, std::string fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::string> get_list(const std::string& key,
                                    std::vector<std::string> fallback) const;
  std::vector<double> get_double_list(const std::string& key,
                                      std::vector<double> fallback) const;

  // Required-key variants: throw std::invalid_argument when missing.
  std::string require_string(const std::string& key) const;

  std::string canonical_text() const;
  std::uint64_t hash() const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::optional<std::string> raw(const std::string& key) const;
  std::map<std::string, std::string> kv_;
};

// CSV emission with a leading `# config_hash=...` comment line.  All doubles
// must be pre-rendered by the caller (use format_full) so that formatting
// policy lives in one place.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::uint64_t config_hash,
            const std::vector<std::string>& header);
  // Braced header lists ({"a", "b"}) would otherwise be ambiguous against the
  // string_view overload (iterator-pair construction).
  CsvWriter(const std::filesystem::path& path, std::uint64_t config_hash,
            std::initializer_list<std::string> header)
      : CsvWriter(path, config_hash, std::vector<std::string>(header)) {}
  // Convenience: a comma-joined header string ("a,b,c").
  CsvWriter(const std::filesystem::path& path, std::uint64_t config_hash,
            std::string_view comma_joined_header);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void row(const std::vector<std::string>& cells);

 private:
  struct Impl;
  Impl* impl_;
  std::size_t columns_;
};

// Tiny JSON-style sidecar with a fixed key order (insertion order).  Values
// are written verbatim when `quoted` is false (numbers/booleans) and as JSON
// strings otherwise.
class Sidecar {
 public:
  void add(std::string key, std::string value, bool quoted);
  void add_number(std::string key, double value);
  void add_int(std::string key, std::int64_t value);
  void add_string(std::string key, std::string value);
  void write(const std::filesystem::path& path) const;
  std::string text() const;

 private:
  std::vector<std::pair<std::string, std::pair<std::string, bool>>> items_;
};

}  // namespace gclab
