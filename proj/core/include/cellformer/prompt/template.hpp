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
#ifndef CELLFORMER_PROMPT_TEMPLATE_HPP_
#define CELLFORMER_PROMPT_TEMPLATE_HPP_

#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cellformer {

inline constexpr std::string_view kPlaceholder = "{value}";

// A sentence with exactly one "{value}" slot, e.g.
// "The weight of patient is {value} kilograms".
class Template {
 public:
  struct Literal {
    std::string text;
    bool operator==(const Literal&) const = default;
  };
  struct Placeholder {
    bool operator==(const Placeholder&) const = default;
  };
  using Segment = std::variant<Literal, Placeholder>;

  // Throws InvalidArgument for empty sources and for zero or several slots.
  static Template Parse(std::string_view source);

  // Used when a feature has no template of its own:
  // "The <name> of the patient is {value}."
  static Template DefaultFor(std::string_view feature_name);

  std::string Render(std::string_view value) const;
  // Inverse of Parse.
  std::string Source() const;

  const std::vector<Segment>& segments() const { return segments_; }
  bool operator==(const Template&) const = default;

 private:
  std::vector<Segment> segments_;
};

}  // namespace cellformer

#endif  // CELLFORMER_PROMPT_TEMPLATE_HPP_
