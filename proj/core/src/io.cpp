#include "mzrom/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "mzrom/errors.hpp"

namespace mzrom {

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  if (ec != std::errc{}) throw IoError("format_double failed");
  return std::string(buf, end);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::span<const double> values) { add_partial_row(values, values.size()); }

void CsvTable::add_partial_row(std::span<const double> values, std::size_t present) {
  if (values.size() != header_.size()) throw InvalidArgument("CsvTable: row width mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) body_ += ',';
    if (i < present && std::isfinite(values[i])) body_ += format_double(values[i]);
  }
  body_ += '\n';
  ++n_rows_;
}

std::string CsvTable::str() const {
  std::string out;
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (i) out += ',';
    out += header_[i];
  }
  out += '\n';
  out += body_;
  return out;
}

void CsvTable::save(const std::filesystem::path& path) const { write_file_atomic(path, str()); }

const std::vector<double>& CsvData::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return columns[i];
  }
  throw InvalidArgument("csv: missing column '" + std::string(name) + "'");
}

CsvData read_csv(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  CsvData data;
  if (!std::getline(in, line)) throw IoError("csv: empty file " + path.string());
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) data.header.push_back(cell);
  }
  data.columns.resize(data.header.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t col = 0, pos = 0;
    while (col < data.header.size()) {
      const std::size_t comma = line.find(',', pos);
      const std::string_view cell(line.data() + pos,
                                  (comma == std::string::npos ? line.size() : comma) - pos);
      double v = std::numeric_limits<double>::quiet_NaN();
      if (!cell.empty()) {
        auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (ec != std::errc{}) throw IoError("csv: bad number in " + path.string());
      }
      data.columns[col++].push_back(v);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    for (; col < data.header.size(); ++col) {
      data.columns[col].push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }
  return data;
}

void append_f64(std::string& out, std::span<const double> values) {
  const std::size_t base = out.size();
  out.resize(base + values.size() * 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto bits = std::bit_cast<std::uint64_t>(values[i]);
    for (int b = 0; b < 8; ++b) {
      out[base + i * 8 + b] = static_cast<char>((bits >> (8 * b)) & 0xff);
    }
  }
}

void read_f64(std::string_view in, std::size_t& offset, std::span<double> values) {
  if (offset + values.size() * 8 > in.size()) throw IoError("binary payload truncated");
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) {
      bits |= std::uint64_t(static_cast<unsigned char>(in[offset + i * 8 + b])) << (8 * b);
    }
    values[i] = std::bit_cast<double>(bits);
  }
  offset += values.size() * 8;
}

}  // namespace mzrom
