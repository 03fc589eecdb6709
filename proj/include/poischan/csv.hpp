#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace poischan::io {

// Number formatting for artifacts: 17 significant digits, '.' decimal
// separator, locale independent.
std::string format_double(double v);

// RFC 4180 field quoting (applied only when the field needs it).
std::string csv_field(const std::string& raw);

// CSV document: one header, rows, then a trailing comment block of
// "# key=value" lines.
class CsvDocument {
public:
  void header(std::vector<std::string> names);
  void row(std::vector<std::string> fields);
  void metadata(const std::string& key, const std::string& value);
  std::string str() const;

private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::pair<std::string, std::string>> meta_;
};

// Writes content to path via a temporary file in the same directory plus
// rename, so an interrupted run never leaves a partial artifact at the
// final path. Throws std::runtime_error on IO failure.
void atomic_write_file(const std::filesystem::path& path,
                       const std::string& content);

// FNV-1a 64-bit, used as the configuration fingerprint in artifacts.
std::uint64_t fnv1a64(const std::string& bytes);

std::string hex64(std::uint64_t v);

}  // namespace poischan::io
