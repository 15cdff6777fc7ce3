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
#include "cellformer/prompt/template.hpp"

#include "cellformer/error.hpp"

namespace cellformer {

Template Template::Parse(std::string_view source) {
  if (source.empty()) throw InvalidArgument("template source is empty");
  const auto first = source.find(kPlaceholder);
  if (first == std::string_view::npos) {
    throw InvalidArgument("template has no {value} placeholder: \"" + std::string(source) + "\"");
  }
  const auto tail = first + kPlaceholder.size();
  if (source.find(kPlaceholder, tail) != std::string_view::npos) {
    throw InvalidArgument("template has more than one {value} placeholder: \"" +
                          std::string(source) + "\"");
  }
  Template t;
  if (first > 0) t.segments_.push_back(Literal{std::string(source.substr(0, first))});
  t.segments_.push_back(Placeholder{});
  if (tail < source.size()) t.segments_.push_back(Literal{std::string(source.substr(tail))});
  return t;
}

Template Template::DefaultFor(std::string_view feature_name) {
  std::string name(feature_name);
  for (auto& ch : name)
    if (ch == '_') ch = ' ';
  return Parse("The " + name + " of the patient is {value}.");
}

std::string Template::Render(std::string_view value) const {
  std::string out;
  for (const auto& segment : segments_) {
    if (const auto* lit = std::get_if<Literal>(&segment)) {
      out += lit->text;
    } else {
      out += value;
    }
  }
  return out;
}

std::string Template::Source() const { return Render(kPlaceholder); }

}  // namespace cellformer
