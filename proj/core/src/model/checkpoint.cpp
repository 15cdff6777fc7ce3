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
#include "cellformer/model/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include <nlohmann/json.hpp>

#include "cellformer/error.hpp"

namespace cellformer {
namespace {

constexpr std::string_view kMagic = "CFCK1\n";

void PutU64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t GetU64(std::string_view bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i])) << (8 * i);
  return v;
}

void PutF32(std::string& out, double value) {
  const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(value));
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

double GetF32(const char* p) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return static_cast<double>(std::bit_cast<float>(bits));
}

}  // namespace

void SaveCheckpoint(const RankModel& model, const std::filesystem::path& path,
                    std::string_view metadata_json) {
  nlohmann::ordered_json header;
  header["format"] = "CFCK1";
  header["spec"] = nlohmann::ordered_json::parse(model.spec().ToJson());
  try {
    header["metadata"] = nlohmann::ordered_json::parse(metadata_json);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("checkpoint metadata is not JSON: ") + e.what());
  }
  auto manifest = nlohmann::ordered_json::array();
  std::string payload;
  for (const auto& p : model.parameters().items()) {
    manifest.push_back({{"name", p.name},
                        {"shape", p.tensor.shape()},
                        {"trainable", p.trainable},
                        {"count", p.tensor.size()}});
    for (double v : p.tensor.values()) PutF32(payload, v);
  }
  header["parameters"] = std::move(manifest);
  const std::string text = header.dump();

  std::string bytes(kMagic);
  PutU64(bytes, text.size());
  bytes += text;
  bytes += payload;

  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write checkpoint " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write to checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

LoadedCheckpoint LoadCheckpoint(const std::filesystem::path& path, const ModelSpec* expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string where = "checkpoint " + path.string() + ": ";
  if (bytes.size() < kMagic.size() + 8 || std::string_view(bytes).substr(0, kMagic.size()) != kMagic) {
    throw FormatError(where + "not a CFCK1 file");
  }
  const std::uint64_t header_len = GetU64(std::string_view(bytes).substr(kMagic.size(), 8));
  const std::size_t header_begin = kMagic.size() + 8;
  if (header_len > bytes.size() - header_begin) throw FormatError(where + "truncated header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(header_begin, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(where + "bad header: " + e.what());
  }
  if (header.value("format", "") != "CFCK1") {
    throw FormatError(where + "unsupported format '" + header.value("format", "") + "'");
  }
  if (!header.contains("spec") || !header.contains("parameters")) {
    throw FormatError(where + "header lacks spec or parameters");
  }
  const ModelSpec spec = ModelSpec::FromJson(header["spec"].dump());
  if (expected && !(spec == *expected)) {
    throw FormatError(where + "model spec " + spec.ToJson() + " does not match expected " +
                      expected->ToJson());
  }

  LoadedCheckpoint result;
  result.model = std::make_unique<RankModel>(spec);
  result.metadata_json = header.contains("metadata") ? header["metadata"].dump() : "{}";
  auto& items = result.model->parameters().items();
  const auto& manifest = header["parameters"];
  if (!manifest.is_array() || manifest.size() != items.size()) {
    throw FormatError(where + "manifest lists " + std::to_string(manifest.size()) +
                      " parameters, spec builds " + std::to_string(items.size()));
  }
  std::size_t offset = header_begin + header_len;
  for (std::size_t i = 0; i < items.size(); ++i) {
    auto& p = items[i];
    const auto& entry = manifest[i];
    try {
      const auto name = entry.at("name").get<std::string>();
      const auto shape = entry.at("shape").get<ad::Shape>();
      const bool trainable = entry.at("trainable").get<bool>();
      if (name != p.name || shape != p.tensor.shape() || trainable != p.trainable) {
        throw FormatError(where + "manifest entry " + std::to_string(i) + " ('" + name + "' " +
                          ad::ShapeString(shape) + ") does not match model parameter '" + p.name +
                          "' " + ad::ShapeString(p.tensor.shape()));
      }
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(where + "bad manifest entry " + std::to_string(i) + ": " + e.what());
    }
    auto values = p.tensor.values();
    if (bytes.size() - offset < 4 * values.size()) throw FormatError(where + "truncated values");
    for (auto& v : values) {
      v = GetF32(bytes.data() + offset);
      offset += 4;
    }
  }
  if (offset != bytes.size()) throw FormatError(where + "trailing bytes after values");
  return result;
}

}  // namespace cellformer
