#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mzrom {

/// Writes content to path via a sibling temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

/// Shortest round-trippable decimal (17 significant digits).
std::string format_double(double v);

/// Column-oriented CSV writer. Non-finite or missing cells are written empty.
class CsvTable {
public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::span<const double> values);
  /// Row where only the first `present` cells are written.
  void add_partial_row(std::span<const double> values, std::size_t present);

  std::string str() const;
  void save(const std::filesystem::path& path) const;

  std::size_t rows() const noexcept { return n_rows_; }
  const std::vector<std::string>& header() const noexcept { return header_; }

private:
  std::vector<std::string> header_;
  std::string body_;
  std::size_t n_rows_ = 0;
};

struct CsvData {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;  // NaN for empty cells

  const std::vector<double>& column(std::string_view name) const;
};

CsvData read_csv(const std::filesystem::path& path);

/// Little-endian float64 encode/decode used by the binary payloads.
void append_f64(std::string& out, std::span<const double> values);
void read_f64(std::string_view in, std::size_t& offset, std::span<double> values);

}  // namespace mzrom
