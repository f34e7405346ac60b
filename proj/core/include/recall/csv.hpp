#pragma once

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

namespace recall {

// Deterministic CSV accumulator; write_atomic lands the file via a temp name
// in the same directory plus rename.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> columns);

  void begin_row();
  CsvWriter& field(const std::string& v);
  CsvWriter& field(double v);
  CsvWriter& field(std::size_t v);
  CsvWriter& field(int v);
  void end_row();

  std::string str() const;
  void write_atomic(const std::filesystem::path& path) const;

  static std::string format_double(double v);

 private:
  std::size_t n_cols_;
  std::size_t row_fields_ = 0;
  bool in_row_ = false;
  std::ostringstream out_;
};

void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace recall
