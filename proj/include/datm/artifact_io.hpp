#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace datm {

std::string read_file(const std::filesystem::path& path);

/// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string sha256_hex(std::string_view bytes);

/// Shortest round-trip-safe rendering used by every text artifact (17 digits).
std::string format_real(double value);

/// Parses a decimal float; throws FormatError (with `line`) on junk or overflow.
double parse_real(std::string_view text, std::size_t line);
long long parse_integer(std::string_view text, std::size_t line);

/// Splits on a single delimiter; empty fields are kept.
std::vector<std::string_view> split(std::string_view text, char delim);
/// Splits on runs of spaces/tabs; empty fields are dropped.
std::vector<std::string_view> split_whitespace(std::string_view text);

/// Lines of a file without trailing '\r'.
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Output-directory index: "name<TAB>sha256<TAB>producer" per artifact.
class Manifest {
 public:
  struct Entry {
    std::string sha256;
    std::string producer;
  };

  static constexpr const char* kFileName = "MANIFEST";

  /// Loads `dir/MANIFEST` if it exists, otherwise an empty manifest.
  static Manifest load(const std::filesystem::path& dir);

  void record(const std::string& name, std::string_view content, const std::string& producer);
  std::optional<Entry> find(const std::string& name) const;
  void save(const std::filesystem::path& dir) const;
  const std::map<std::string, Entry>& entries() const noexcept { return entries_; }

 private:
  std::map<std::string, Entry> entries_;
};

/// Reads an upstream artifact. A missing file raises DataError naming the
/// command that produces it; when the file's directory carries a MANIFEST
/// listing it, the checksum must match.
std::string read_artifact(const std::filesystem::path& path, std::string_view producer);

}  // namespace datm
