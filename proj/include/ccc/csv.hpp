#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ccc::csv {

// Minimal RFC 4180 reader: comma separated, double quotes for fields that
// contain commas, quotes or newlines. The first record is the header.
class Table {
 public:
  Table() = default;
  Table(std::vector<std::string> header, std::vector<std::vector<std::string>> rows);

  static Table parse(std::string_view text, const std::string& origin = "<memory>");
  static Table read(const std::filesystem::path& path);

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }

  // Column index, throws ValidationError naming the file when absent.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;

  const std::string& at(std::size_t row, std::string_view name) const;
  double number(std::size_t row, std::string_view name) const;
  long long integer(std::size_t row, std::string_view name) const;

  const std::string& origin() const { return origin_; }

 private:
  std::string origin_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Row-at-a-time writer; quotes fields only when needed.
class Writer {
 public:
  explicit Writer(std::vector<std::string> header);

  Writer& row(const std::vector<std::string>& fields);
  std::string str() const { return out_; }
  void save(const std::filesystem::path& path) const;

 private:
  std::size_t width_;
  std::string out_;
};

std::string quote(std::string_view field);

// Shortest representation that parses back to the identical double.
std::string format_double(double v);
double parse_double(std::string_view s, const std::string& context);
long long parse_integer(std::string_view s, const std::string& context);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace ccc::csv
