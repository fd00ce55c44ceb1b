#pragma once
// Minimal RFC 4180 reader/writer shared by every file format in the project.

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace eimpact::csv {

struct Row {
  std::size_t line = 0;  // 1-based physical line where the row starts
  std::vector<std::string> fields;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  // Returns false at end of input. Throws MalformedRow on an unterminated
  // quoted field.
  bool next(Row& row);

 private:
  std::istream& in_;
  std::size_t line_ = 1;
};

// Header lookup: maps column name to index. Names are trimmed; a UTF-8 BOM on
// the first column is ignored.
class Header {
 public:
  explicit Header(const std::vector<std::string>& names);

  std::optional<std::size_t> find(std::string_view name) const;
  // Throws MissingColumn(name).
  std::size_t require(std::string_view name) const;
  std::size_t size() const { return size_; }

 private:
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t size_ = 0;
};

// Reads the header row and every data row; throws MissingColumn for each
// required name that is absent and MalformedRow(line) on arity mismatch.
struct Table {
  Header header;
  std::vector<Row> rows;
};
Table read_table(std::istream& in, const std::vector<std::string_view>& required);

std::string escape(std::string_view field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace eimpact::csv
