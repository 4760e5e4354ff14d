#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace nlab {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// Parse a full string as a double; ConfigError with `what` on failure.
double parse_double(std::string_view text, std::string_view what = "value");

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view data);

/// Row-oriented CSV output with a fixed header. Optional '# key=value'
/// comment lines must be written before the first row.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> header,
            const std::vector<std::pair<std::string, std::string>>& comments = {});

  CsvWriter& cell(double v);
  CsvWriter& cell(std::string_view v);
  CsvWriter& cell(long long v);
  CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
  /// Terminates the row; throws UsageError when the cell count is off.
  void end_row();

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t columns_;
  std::size_t pending_ = 0;
};

struct CsvTable {
  std::map<std::string, std::string> meta;  // from '# key=value' lines
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column_index(std::string_view name) const;
  std::vector<double> column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

}  // namespace nlab
