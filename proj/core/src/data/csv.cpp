/**
 * Copyright 2026 The Cellformer Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "cellformer/data/csv.hpp"

#include <istream>
#include <ostream>

#include "cellformer/error.hpp"

namespace cellformer::csv {

std::optional<Record> Reader::Next() {
  int c = in_.peek();
  if (c == std::char_traits<char>::eof()) return std::nullopt;

  record_line_ = line_;
  Record record;
  std::string field;
  bool quoted = false;
  bool field_started_quoted = false;
  while (true) {
    c = in_.get();
    if (c == std::char_traits<char>::eof()) {
      if (quoted) throw FormatError("CSV line " + std::to_string(record_line_) + ": unterminated quote");
      record.push_back(std::move(field));
      return record;
    }
    const char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line_;
        field += ch;
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (!field.empty() || field_started_quoted) {
          throw FormatError("CSV line " + std::to_string(line_) + ": stray quote inside field");
        }
        quoted = true;
        field_started_quoted = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        field_started_quoted = false;
        break;
      case '\r':
        if (in_.peek() == '\n') break;
        field += ch;
        break;
      case '\n':
        ++line_;
        record.push_back(std::move(field));
        return record;
      default:
        field += ch;
    }
  }
}

std::string Escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

void WriteRecord(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << Escape(fields[i]);
  }
  out << '\n';
}

}  // namespace cellformer::csv
