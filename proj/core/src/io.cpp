#include "gclab/io.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gclab {

std::string format_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

Config Config::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("config: cannot open " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

Config Config::from_text(std::string_view text) {
  Config cfg;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    ++line_no;
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;

    const std::size_t hash_pos = line.find('#');
    if (hash_pos != std::string_view::npos) line = line.substr(0, hash_pos);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                  " has no '='");
    }
    const std::string key = trim(std::string_view(stripped).substr(0, eq));
    const std::string value = trim(std::string_view(stripped).substr(eq + 1));
    if (key.empty()) {
      throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                  " has empty key");
    }
    cfg.kv_[key] = value;
  }
  return cfg;
}

void Config::set(const std::string& key, std::string value) {
  kv_[key] = std::move(value);
}

bool Config::has(const std::string& key) const { return kv_.count(key) > 0; }

std::optional<std::string> Config::raw(const std::string& key) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return std::nullopt;
  return it->second;
}

std::string Config::get_string(const std::string& key,
                               std::string fallback) const {
  return raw(key).value_or(std::move(fallback));
}

std::int64_t Config::get_int(const std::string& key,
                             std::int64_t fallback) const {
  const auto v = raw(key);
  if (!v) return fallback;
  try {
    return std::stoll(*v);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: key '" + key + "' is not an integer: " + *v);
  }
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto v = raw(key);
  if (!v) return fallback;
  try {
    return std::stod(*v);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: key '" + key + "' is not a number: " + *v);
  }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto v = raw(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw std::invalid_argument("config: key '" + key + "' is not a boolean: " + *v);
}

std::vector<std::string> Config::get_list(
    const std::string& key, std::vector<std::string> fallback) const {
  const auto v = raw(key);
  if (!v) return fallback;
  std::vector<std::string> out;
  std::stringstream ss(*v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

std::vector<double> Config::get_double_list(const std::string& key,
                                            std::vector<double> fallback) const {
  const auto items = raw(key);
  if (!items) return fallback;
  std::vector<double> out;
  for (const std::string& s : get_list(key, {})) {
    try {
      out.push_back(std::stod(s));
    } catch (const std::exception&) {
      throw std::invalid_argument("config: key '" + key +
                                  "' has a non-numeric list item: " + s);
    }
  }
  return out;
}

std::string Config::require_string(const std::string& key) const {
  const auto v = raw(key);
  if (!v) throw std::invalid_argument("config: missing required key '" + key + "'");
  return *v;
}

std::string Config::canonical_text() const {
  std::string out;
  for (const auto& [k, v] : kv_) {  // std::map iterates keys sorted
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

std::uint64_t Config::hash() const { return fnv1a64(canonical_text()); }

struct CsvWriter::Impl {
  std::ofstream out;
};

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     std::uint64_t config_hash,
                     const std::vector<std::string>& header)
    : impl_(new Impl), columns_(header.size()) {
  impl_->out.open(path, std::ios::binary);  // binary: LF line ends everywhere
  if (!impl_->out) {
    delete impl_;
    throw std::runtime_error("csv: cannot open " + path.string() + " for writing");
  }
  impl_->out << "# config_hash=" << hex64(config_hash) << "\n";
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) impl_->out << ',';
    impl_->out << header[i];
  }
  impl_->out << "\n";
}

namespace {
std::vector<std::string> split_header(std::string_view joined) {
  std::vector<std::string> cells;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = joined.find(',', pos);
    if (comma == std::string_view::npos) {
      cells.emplace_back(joined.substr(pos));
      return cells;
    }
    cells.emplace_back(joined.substr(pos, comma - pos));
    pos = comma + 1;
  }
}
}  // namespace

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     std::uint64_t config_hash,
                     std::string_view comma_joined_header)
    : CsvWriter(path, config_hash, split_header(comma_joined_header)) {}

CsvWriter::~CsvWriter() { delete impl_; }

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) {
    throw std::invalid_argument("csv: row width does not match header");
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) impl_->out << ',';
    impl_->out << cells[i];
  }
  impl_->out << "\n";
}

void Sidecar::add(std::string key, std::string value, bool quoted) {
  items_.emplace_back(std::move(key), std::make_pair(std::move(value), quoted));
}

void Sidecar::add_number(std::string key, double value) {
  add(std::move(key), format_full(value), false);
}

void Sidecar::add_int(std::string key, std::int64_t value) {
  add(std::move(key), std::to_string(value), false);
}

void Sidecar::add_string(std::string key, std::string value) {
  add(std::move(key), std::move(value), true);
}

std::string Sidecar::text() const {
  std::string out = "{\n";
  for (std::size_t i = 0; i < items_.size(); ++i) {
    const auto& [key, vq] = items_[i];
    out += "  \"" + key + "\": ";
    if (vq.second) {
      out += '"';
      for (char c : vq.first) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
      }
      out += '"';
    } else {
      out += vq.first;
    }
    if (i + 1 < items_.size()) out += ',';
    out += '\n';
  }
  out += "}\n";
  return out;
}

void Sidecar::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("sidecar: cannot open " + path.string());
  out << text();
}

}  // namespace gclab
