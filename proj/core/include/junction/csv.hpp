#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace junction::csv {

// Header-indexed CSV table. Quoted fields with embedded commas are supported; embedded
// newlines are not. Lines starting with '#' are comments.
class Table {
 public:
  static Table read(const std::filesystem::path& file);
  static Table parse(std::string_view text);

  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return cells_.size(); }
  std::optional<std::size_t> column(std::string_view name) const;
  const std::string& cell(std::size_t row, std::size_t col) const { return cells_[row][col]; }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> cells_;
};

std::vector<std::string> split_line(std::string_view line);

// Throws std::invalid_argument naming `what` on malformed input.
double parse_double(std::string_view text, std::string_view what);
long long parse_int(std::string_view text, std::string_view what);

// Shortest representation that parses back to the identical double.
std::string format_double(double v);

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  Writer& field(std::string_view text);
  Writer& field(double v);
  Writer& field(long long v);
  Writer& field(int v) { return field(static_cast<long long>(v)); }
  Writer& field(std::size_t v) { return field(static_cast<long long>(v)); }
  Writer& empty_field();
  void end_row();
  void row(const std::vector<std::string>& fields);

 private:
  void sep();
  std::ostream& out_;
  bool first_ = true;
};

}  // namespace junction::csv
