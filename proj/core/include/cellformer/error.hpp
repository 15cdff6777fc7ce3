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
#ifndef CELLFORMER_ERROR_HPP_
#define CELLFORMER_ERROR_HPP_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace cellformer {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller passed something outside an operation's contract (bad rate, K < 2, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Tensor shapes incompatible for an operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Input data could not be interpreted. Carries optional row/column coordinates;
// rows are 1-based data rows (header excluded), columns are names.
class DataError : public Error {
 public:
  explicit DataError(const std::string& message,
                     std::optional<std::size_t> row = std::nullopt,
                     std::string column = {})
      : Error(Format(message, row, column)), row_(row), column_(std::move(column)) {}

  std::optional<std::size_t> row() const { return row_; }
  const std::string& column() const { return column_; }

 private:
  static std::string Format(const std::string& message, std::optional<std::size_t> row,
                            const std::string& column) {
    std::string out;
    if (row) out += "row " + std::to_string(*row);
    if (!column.empty()) {
      if (!out.empty()) out += ", ";
      out += "column '" + column + "'";
    }
    return out.empty() ? message : out + ": " + message;
  }

  std::optional<std::size_t> row_;
  std::string column_;
};

// A file on disk does not follow its documented format.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Prompt text has no entry in an embedding store.
class StoreMiss : public Error {
 public:
  explicit StoreMiss(const std::string& text)
      : Error("embedding store has no entry for prompt \"" + text + "\""), text_(text) {}
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

}  // namespace cellformer

#endif  // CELLFORMER_ERROR_HPP_
