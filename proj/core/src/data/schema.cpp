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
#include "cellformer/data/schema.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cellformer/error.hpp"

namespace cellformer {

using nlohmann::json;

std::string_view ImputationName(Imputation i) {
  switch (i) {
    case Imputation::kMean:
      return "mean";
    case Imputation::kMode:
      return "mode";
    case Imputation::kNone:
      return "none";
  }
  return "unknown";
}

Imputation ParseImputation(std::string_view name) {
  if (name == "mean") return Imputation::kMean;
  if (name == "mode") return Imputation::kMode;
  if (name == "none") return Imputation::kNone;
  throw InvalidArgument("unknown imputation '" + std::string(name) + "'");
}

Imputation DefaultImputation(Modality m) {
  switch (m) {
    case Modality::kContinuous:
      return Imputation::kMean;
    case Modality::kCategorical:
    case Modality::kBinary:
      return Imputation::kMode;
    case Modality::kFreeText:
      return Imputation::kNone;
  }
  return Imputation::kNone;
}

void FeatureSpec::Validate() const {
  if (name.empty()) throw InvalidArgument("feature name is empty");
  if (imputation != DefaultImputation(modality)) {
    throw InvalidArgument("feature '" + name + "': " + std::string(ModalityName(modality)) +
                          " features use imputation '" +
                          std::string(ImputationName(DefaultImputation(modality))) + "', not '" +
                          std::string(ImputationName(imputation)) + "'");
  }
}

TableSchema::TableSchema(std::vector<FeatureSpec> features, LabelSpec label)
    : features_(std::move(features)), label_(std::move(label)) {
  Validate();
}

void TableSchema::Validate() const {
  if (features_.empty()) throw InvalidArgument("schema declares no features");
  std::set<std::string> names;
  for (const auto& f : features_) {
    f.Validate();
    if (!names.insert(f.name).second) throw InvalidArgument("duplicate feature name '" + f.name + "'");
  }
  if (names.count(label_.column)) {
    throw InvalidArgument("label column '" + label_.column + "' collides with a feature name");
  }
  if (label_.edges.empty()) throw InvalidArgument("label needs at least one bin edge (K >= 2)");
  for (std::size_t k = 1; k < label_.edges.size(); ++k) {
    if (!(label_.edges[k] > label_.edges[k - 1])) {
      throw InvalidArgument("label bin edges must be strictly increasing");
    }
  }
}

std::optional<std::size_t> TableSchema::IndexOf(std::string_view name) const {
  for (std::size_t j = 0; j < features_.size(); ++j)
    if (features_[j].name == name) return j;
  return std::nullopt;
}

TableSchema TableSchema::Permuted(const std::vector<std::size_t>& order) const {
  std::vector<FeatureSpec> features;
  features.reserve(order.size());
  for (auto j : order) features.push_back(features_.at(j));
  return TableSchema(std::move(features), label_);
}

TableSchema TableSchema::FromJson(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("schema is not valid JSON: ") + e.what());
  }
  try {
    std::vector<FeatureSpec> features;
    for (const auto& f : doc.at("features")) {
      FeatureSpec spec;
      spec.name = f.at("name").get<std::string>();
      spec.modality = ParseModality(f.at("modality").get<std::string>());
      spec.prompt = f.contains("template") ? Template::Parse(f["template"].get<std::string>())
                                           : Template::DefaultFor(spec.name);
      spec.imputation = f.contains("imputation")
                            ? ParseImputation(f["imputation"].get<std::string>())
                            : DefaultImputation(spec.modality);
      features.push_back(std::move(spec));
    }
    const auto& l = doc.at("label");
    LabelSpec label;
    label.column = l.value("column", std::string("duration"));
    label.units = l.value("units", std::string());
    if (l.contains("preset")) {
      const auto preset = l["preset"].get<std::string>();
      if (preset == "surgery_hours") {
        label.edges = kSurgeryEdgesHours;
        if (label.units.empty()) label.units = "hours";
      } else if (preset == "icu_days") {
        label.edges = kIcuStayEdgesDays;
        if (label.units.empty()) label.units = "days";
      } else {
        throw InvalidArgument("unknown label preset '" + preset + "'");
      }
    } else {
      label.edges = l.at("edges").get<std::vector<double>>();
    }
    return TableSchema(std::move(features), std::move(label));
  } catch (const json::exception& e) {
    throw FormatError(std::string("schema descriptor: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("schema descriptor: ") + e.what());
  }
}

TableSchema TableSchema::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open schema file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return FromJson(buffer.str());
}

std::string TableSchema::ToJson() const {
  json features = json::array();
  for (const auto& f : features_) {
    features.push_back({{"name", f.name},
                        {"modality", ModalityName(f.modality)},
                        {"template", f.prompt.Source()},
                        {"imputation", ImputationName(f.imputation)}});
  }
  json doc = {{"features", features},
              {"label", {{"column", label_.column}, {"edges", label_.edges}, {"units", label_.units}}}};
  return doc.dump(2) + "\n";
}

void TableSchema::Save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write schema file " + path.string());
  out << ToJson();
}

}  // namespace cellformer
