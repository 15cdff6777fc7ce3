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
#ifndef CELLFORMER_DATA_CSV_HPP_
#define CELLFORMER_DATA_CSV_HPP_

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cellformer::csv {

using Record = std::vector<std::string>;

// RFC 4180 reader: comma separated, double-quoted fields may hold commas,
// quotes ("") and newlines. Accepts LF or CRLF. Returns nullopt at end of input.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}
  std::optional<Record> Next();
  // 1-based line on which the last returned record started.
  std::size_t line() const { return record_line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 1;
  std::size_t record_line_ = 0;
};

// Quotes only when needed.
std::string Escape(std::string_view field);
void WriteRecord(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace cellformer::csv

#endif  // CELLFORMER_DATA_CSV_HPP_
