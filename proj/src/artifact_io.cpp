#include "datm/artifact_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "datm/error.hpp"

namespace datm {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
  return out;
}

std::string format_real(double value) { return fmt::format("{:.17g}", value); }

double parse_real(std::string_view text, std::size_t line) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw FormatError("invalid number '" + std::string(text) + "'", line);
  }
  return value;
}

long long parse_integer(std::string_view text, std::size_t line) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw FormatError("invalid integer '" + std::string(text) + "'", line);
  }
  return value;
}

std::vector<std::string_view> split(std::string_view text, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = text.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(text.substr(start));
      return out;
    }
    out.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string_view> split_whitespace(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ' && text[j] != '\t') ++j;
    if (j > i) out.push_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

Manifest Manifest::load(const fs::path& dir) {
  Manifest m;
  const fs::path file = dir / kFileName;
  if (!fs::exists(file)) return m;
  std::size_t lineno = 0;
  for (const auto& line : read_lines(file)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto fields = split(line, '\t');
    if (fields.size() != 3) throw FormatError("malformed MANIFEST entry", lineno);
    m.entries_[std::string(fields[0])] = Entry{std::string(fields[1]), std::string(fields[2])};
  }
  return m;
}

void Manifest::record(const std::string& name, std::string_view content,
                      const std::string& producer) {
  entries_[name] = Entry{sha256_hex(content), producer};
}

std::optional<Manifest::Entry> Manifest::find(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void Manifest::save(const fs::path& dir) const {
  std::string out = "# name\tsha256\tproducer\n";
  for (const auto& [name, e] : entries_) out += name + "\t" + e.sha256 + "\t" + e.producer + "\n";
  write_file_atomic(dir / kFileName, out);
}

std::string read_artifact(const fs::path& path, std::string_view producer) {
  if (!fs::exists(path)) {
    throw DataError("missing artifact " + path.string() + " (produced by `datm " +
                    std::string(producer) + "`)");
  }
  std::string content = read_file(path);
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  const Manifest manifest = Manifest::load(dir);
  if (auto entry = manifest.find(path.filename().string())) {
    if (entry->sha256 != sha256_hex(content)) {
      throw DataError("checksum mismatch for " + path.string() + "; re-run `datm " +
                      entry->producer + "`");
    }
  }
  return content;
}

}  // namespace datm
