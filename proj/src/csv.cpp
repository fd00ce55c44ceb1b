#include "eimpact/csv.hpp"

#include <algorithm>

#include "eimpact/error.hpp"

namespace eimpact::csv {

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

bool Reader::next(Row& row) {
  row.fields.clear();
  row.line = line_;

  int c = in_.get();
  if (c == EOF) return false;

  std::string field;
  bool quoted = false;
  bool field_was_quoted = false;
  for (;; c = in_.get()) {
    if (quoted) {
      if (c == EOF) throw Error(ErrorCode::MalformedRow, std::to_string(row.line));
      if (c == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line_;
        field.push_back(static_cast<char>(c));
      }
      continue;
    }
    if (c == EOF || c == '\n' || c == '\r') {
      if (c == '\r' && in_.peek() == '\n') in_.get();
      if (c != EOF) ++line_;
      row.fields.push_back(std::move(field));
      return true;
    }
    if (c == ',') {
      row.fields.push_back(std::move(field));
      field.clear();
      field_was_quoted = false;
    } else if (c == '"' && field.empty() && !field_was_quoted) {
      quoted = true;
      field_was_quoted = true;
    } else {
      field.push_back(static_cast<char>(c));
    }
  }
}

Header::Header(const std::vector<std::string>& names) : size_(names.size()) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    std::string name = trim(names[i]);
    if (i == 0 && name.rfind("\xEF\xBB\xBF", 0) == 0) name.erase(0, 3);
    index_.emplace(std::move(name), i);
  }
}

std::optional<std::size_t> Header::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Header::require(std::string_view name) const {
  auto idx = find(name);
  if (!idx) throw Error(ErrorCode::MissingColumn, std::string(name));
  return *idx;
}

Table read_table(std::istream& in, const std::vector<std::string_view>& required) {
  Reader reader(in);
  Row head;
  if (!reader.next(head)) throw Error(ErrorCode::MissingColumn, std::string(required.empty() ? "" : required.front()));
  Table table{Header(head.fields), {}};
  for (auto name : required) table.header.require(name);

  Row row;
  while (reader.next(row)) {
    // blank trailing lines
    if (row.fields.size() == 1 && row.fields[0].empty()) continue;
    if (row.fields.size() != table.header.size())
      throw Error(ErrorCode::MalformedRow, std::to_string(row.line));
    table.rows.push_back(row);
  }
  return table;
}

std::string escape(std::string_view field) {
  bool needs = field.find_first_of(",\"\r\n") != std::string_view::npos ||
               (!field.empty() && (field.front() == ' ' || field.back() == ' '));
  if (!needs) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

}  // namespace eimpact::csv
