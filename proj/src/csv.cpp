#include "ccc/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "ccc/error.hpp"

namespace ccc::csv {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

Table::Table(std::vector<std::string> header, std::vector<std::vector<std::string>> rows)
    : header_(std::move(header)), rows_(std::move(rows)) {
  for (std::size_t i = 0; i < header_.size(); ++i) index_.emplace(header_[i], i);
}

Table Table::parse(std::string_view text, const std::string& origin) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_quoted = false;
  bool any = false;

  auto end_field = [&] {
    record.push_back(field_quoted ? field : trim(field));
    field.clear();
    field_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    bool blank = record.size() == 1 && record[0].empty();
    if (!blank) records.push_back(std::move(record));
    record.clear();
    any = false;
  };

  if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF &&
      static_cast<unsigned char>(text[1]) == 0xBB && static_cast<unsigned char>(text[2]) == 0xBF)
    text.remove_prefix(3);

  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    any = true;
    if (c == '"') {
      in_quotes = true;
      field_quoted = true;
      field.clear();
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      end_record();
    } else {
      field.push_back(c);
    }
  }
  if (in_quotes) throw ValidationError(origin + ": unterminated quoted field");
  if (any || !field.empty() || !record.empty()) end_record();

  if (records.empty()) throw ValidationError(origin + ": empty CSV (no header)");
  std::vector<std::string> header = std::move(records.front());
  records.erase(records.begin());
  for (std::size_t r = 0; r < records.size(); ++r) {
    if (records[r].size() != header.size()) {
      throw ValidationError(origin + ": row " + std::to_string(r + 2) + " has " +
                            std::to_string(records[r].size()) + " fields, header has " +
                            std::to_string(header.size()));
    }
  }
  Table t(std::move(header), std::move(records));
  t.origin_ = origin;
  return t;
}

Table Table::read(const std::filesystem::path& path) { return parse(read_file(path), path.string()); }

bool Table::has_column(std::string_view name) const { return index_.count(std::string(name)) != 0; }

std::size_t Table::column(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw ValidationError(origin_ + ": missing column '" + std::string(name) + "'");
  return it->second;
}

const std::string& Table::at(std::size_t row, std::string_view name) const { return rows_.at(row)[column(name)]; }

double Table::number(std::size_t row, std::string_view name) const {
  return parse_double(at(row, name), origin_ + " row " + std::to_string(row + 2) + " column " + std::string(name));
}

long long Table::integer(std::size_t row, std::string_view name) const {
  return parse_integer(at(row, name), origin_ + " row " + std::to_string(row + 2) + " column " + std::string(name));
}

Writer::Writer(std::vector<std::string> header) : width_(header.size()) { row(header); }

Writer& Writer::row(const std::vector<std::string>& fields) {
  if (fields.size() != width_) throw std::logic_error("csv::Writer: row width mismatch");
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_.push_back(',');
    out_ += quote(fields[i]);
  }
  out_.push_back('\n');
  return *this;
}

void Writer::save(const std::filesystem::path& path) const { write_file(path, out_); }

std::string quote(std::string_view field) {
  bool needs = field.find_first_of(",\"\n\r") != std::string_view::npos ||
               (!field.empty() && (field.front() == ' ' || field.back() == ' '));
  if (!needs) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s, const std::string& context) {
  std::string t = trim(s);
  std::string_view v = t;
  if (!v.empty() && v.front() == '+') v.remove_prefix(1);
  double out = 0.0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ValidationError(context + ": not a number: '" + std::string(s) + "'");
  return out;
}

long long parse_integer(std::string_view s, const std::string& context) {
  std::string t = trim(s);
  long long out = 0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), out);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw ValidationError(context + ": not an integer: '" + std::string(s) + "'");
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

}  // namespace ccc::csv
