#include "recall/csv.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace recall {

CsvWriter::CsvWriter(std::vector<std::string> columns) : n_cols_(columns.size()) {
  if (columns.empty()) throw std::invalid_argument("CsvWriter: no columns");
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out_ << ',';
    out_ << columns[i];
  }
  out_ << '\n';
}

void CsvWriter::begin_row() {
  if (in_row_) throw std::logic_error("CsvWriter: row already open");
  in_row_ = true;
  row_fields_ = 0;
}

CsvWriter& CsvWriter::field(const std::string& v) {
  if (!in_row_) begin_row();
  if (row_fields_) out_ << ',';
  out_ << v;
  ++row_fields_;
  return *this;
}

CsvWriter& CsvWriter::field(double v) { return field(format_double(v)); }
CsvWriter& CsvWriter::field(std::size_t v) { return field(std::to_string(v)); }
CsvWriter& CsvWriter::field(int v) { return field(std::to_string(v)); }

void CsvWriter::end_row() {
  if (!in_row_ || row_fields_ != n_cols_)
    throw std::logic_error("CsvWriter: row field count mismatch");
  out_ << '\n';
  in_row_ = false;
}

std::string CsvWriter::str() const { return out_.str(); }

std::string CsvWriter::format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void CsvWriter::write_atomic(const std::filesystem::path& path) const {
  write_file_atomic(path, str());
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_file_atomic: cannot open " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write_file_atomic: write failed");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace recall
