#pragma once

#include <string>
#include <vector>

namespace decaykit {

/// Shortest round-trip decimal representation; integral values print without
/// a fractional part. Single formatting path keeps file outputs byte-stable.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Plain comma-separated values, no quoting, '\n' line endings. First line is
/// the header. Empty trailing fields are preserved.
CsvTable read_csv(const std::string& path);

void write_csv(const std::string& path, const CsvTable& table);

/// Atomic-ish file write (write then flush); throws Error on I/O failure.
void write_text_file(const std::string& path, const std::string& content);

std::string read_text_file(const std::string& path);

}  // namespace decaykit
