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
#include "cellformer/embed/embedding.hpp"

#include <cmath>
#include <fstream>
#include <istream>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "cellformer/error.hpp"
#include "cellformer/random.hpp"

namespace cellformer {

using nlohmann::json;

// ---- Hash embedder ----

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const auto byte = static_cast<unsigned char>(ch);
    const bool word = byte >= 0x80 || (byte >= '0' && byte <= '9') ||
                      (byte >= 'a' && byte <= 'z') || (byte >= 'A' && byte <= 'Z');
    if (word) {
      current += (byte >= 'A' && byte <= 'Z') ? static_cast<char>(byte - 'A' + 'a') : ch;
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::uint64_t Fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (char ch : bytes) {
    hash ^= static_cast<unsigned char>(ch);
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

Embedding HashEmbed(std::string_view text, std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw InvalidArgument("hash embedding dimension must be >= 1");
  Embedding out(dim, 0.0);
  const auto tokens = Tokenize(text);
  if (tokens.empty()) return out;
  for (const auto& token : tokens) {
    std::uint64_t state = Fnv1a64(token) ^ seed;
    for (std::size_t d = 0; d < dim; ++d) {
      const double u = static_cast<double>(SplitMix64(state) >> 11) * 0x1.0p-53;
      out[d] += 2.0 * u - 1.0;
    }
  }
  double norm = 0.0;
  for (auto& v : out) {
    v /= static_cast<double>(tokens.size());
    norm += v * v;
  }
  norm = std::sqrt(norm);
  if (norm > 0.0)
    for (auto& v : out) v /= norm;
  return out;
}

// ---- CEMB v1 store ----

std::string ContentKey(std::string_view text) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(2 * length, '0');
  for (unsigned int i = 0; i < length; ++i) {
    out[2 * i] = kHex[digest[i] >> 4];
    out[2 * i + 1] = kHex[digest[i] & 0xF];
  }
  return out;
}

namespace {

bool IsContentKey(const std::string& key) {
  if (key.size() != 64) return false;
  for (char c : key)
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  return true;
}

double L2Norm(std::span<const double> v) {
  double total = 0.0;
  for (double x : v) total += x * x;
  return std::sqrt(total);
}

}  // namespace

EmbeddingStore EmbeddingStore::Open(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open embedding store " + path.string());
  return Parse(in, path.string());
}

EmbeddingStore EmbeddingStore::Parse(std::istream& in, const std::string& source_name) {
  const auto fail = [&](std::size_t line, const std::string& what) {
    return FormatError(source_name + ":" + std::to_string(line) + ": " + what);
  };
  EmbeddingStore store;
  std::string line;
  if (!std::getline(in, line)) throw fail(1, "empty file; expected a CEMB header");

  std::size_t count = 0;
  try {
    const auto header = json::parse(line);
    const auto version = header.at("version").get<std::string>();
    if (version != "CEMB1") throw fail(1, "unsupported store version '" + version + "'");
    store.metadata_.version = version;
    store.metadata_.dim = header.at("dim").get<std::size_t>();
    count = header.at("count").get<std::size_t>();
    store.metadata_.normalized = header.at("normalized").get<bool>();
    store.metadata_.producer = header.value("producer", std::string());
    for (const auto& [key, value] : header.items()) {
      if (key == "version" || key == "dim" || key == "count" || key == "normalized" ||
          key == "producer") {
        continue;
      }
      store.metadata_.extra[key] = value.is_string() ? value.get<std::string>() : value.dump();
    }
  } catch (const json::exception& e) {
    throw fail(1, std::string("malformed header: ") + e.what());
  }
  if (store.metadata_.dim == 0) throw fail(1, "header dim must be >= 1");

  const std::size_t dim = store.metadata_.dim;
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    std::string key;
    Embedding vec;
    try {
      const auto record = json::parse(line);
      key = record.at("key").get<std::string>();
      const auto& values = record.at("vec");
      if (!values.is_array()) throw fail(line_number, "'vec' is not an array");
      vec.reserve(values.size());
      for (const auto& v : values) vec.push_back(static_cast<double>(static_cast<float>(v.get<double>())));
    } catch (const json::exception& e) {
      throw fail(line_number, std::string("malformed record: ") + e.what());
    }
    if (!IsContentKey(key)) throw fail(line_number, "key is not 64 lowercase hex characters");
    if (vec.size() != dim) {
      throw fail(line_number, "vector has " + std::to_string(vec.size()) +
                                  " values but header dim is " + std::to_string(dim));
    }
    if (store.metadata_.normalized && std::abs(L2Norm(vec) - 1.0) > 1e-4) {
      throw fail(line_number, "store is flagged normalized but vector norm is " +
                                  std::to_string(L2Norm(vec)));
    }
    if (!store.entries_.emplace(std::move(key), std::move(vec)).second) {
      throw fail(line_number, "duplicate key");
    }
  }
  if (store.entries_.size() != count) {
    throw fail(line_number, "header count " + std::to_string(count) + " but file holds " +
                                std::to_string(store.entries_.size()) + " records");
  }
  return store;
}

bool EmbeddingStore::Contains(std::string_view text) const {
  return text.empty() || entries_.count(ContentKey(text)) > 0;
}

const Embedding* EmbeddingStore::FindByKey(const std::string& key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

Embedding EmbeddingStore::Lookup(std::string_view text) const {
  if (text.empty()) return Embedding(dim(), 0.0);
  if (const auto* vec = FindByKey(ContentKey(text))) return *vec;
  throw StoreMiss(std::string(text));
}

void WriteStore(std::span<const std::pair<std::string, Embedding>> entries,
                const std::filesystem::path& path, bool normalize, const std::string& producer) {
  if (entries.empty()) throw InvalidArgument("cannot write an empty embedding store");
  const std::size_t dim = entries.front().second.size();
  if (dim == 0) throw InvalidArgument("embedding dimension must be >= 1");

  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<float>> records;
  for (const auto& [text, vec] : entries) {
    if (vec.size() != dim) {
      throw InvalidArgument("embedding for \"" + text + "\" has " + std::to_string(vec.size()) +
                            " values, expected " + std::to_string(dim));
    }
    const double scale = normalize ? L2Norm(vec) : 1.0;
    if (normalize && scale == 0.0) {
      throw InvalidArgument("cannot normalize the zero vector of \"" + text + "\"");
    }
    std::vector<float> stored(dim);
    for (std::size_t d = 0; d < dim; ++d) stored[d] = static_cast<float>(vec[d] / scale);
    auto key = ContentKey(text);
    const auto [it, inserted] = records.emplace(key, stored);
    if (inserted) {
      order.push_back(std::move(key));
    } else if (it->second != stored) {
      throw InvalidArgument("conflicting embeddings for repeated prompt \"" + text + "\"");
    }
  }

  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw FormatError("cannot write embedding store " + tmp);
    json header = {{"version", "CEMB1"},
                   {"dim", dim},
                   {"count", order.size()},
                   {"normalized", normalize},
                   {"producer", producer}};
    out << header.dump() << '\n';
    for (const auto& key : order) {
      const auto& stored = records[key];
      json vec = json::array();
      for (float v : stored) vec.push_back(static_cast<double>(v));
      out << json{{"key", key}, {"vec", vec}}.dump() << '\n';
    }
    if (!out) throw FormatError("write failed for embedding store " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

// ---- Providers ----

HashEmbeddingProvider::HashEmbeddingProvider(std::size_t dim, std::uint64_t seed)
    : dim_(dim), seed_(seed) {
  if (dim == 0) throw InvalidArgument("hash embedding dimension must be >= 1");
}

Embedding HashEmbeddingProvider::Embed(std::string_view text) const {
  return HashEmbed(text, dim_, seed_);
}

std::string HashEmbeddingProvider::Describe() const {
  return "hash(dim=" + std::to_string(dim_) + ",seed=" + std::to_string(seed_) + ")";
}

StoreEmbeddingProvider::StoreEmbeddingProvider(std::shared_ptr<const EmbeddingStore> store)
    : store_(std::move(store)) {
  if (!store_) throw InvalidArgument("null embedding store");
}

Embedding StoreEmbeddingProvider::Embed(std::string_view text) const { return store_->Lookup(text); }

std::string StoreEmbeddingProvider::Describe() const {
  return "store(dim=" + std::to_string(store_->dim()) + ",producer=" + store_->metadata().producer +
         ")";
}

EmbeddedSample EmbedSample(const EmbeddingProvider& provider, const PromptedSample& sample,
                           std::size_t row_number) {
  if (sample.prompts.size() != sample.presence.size()) {
    throw InvalidArgument("prompted sample has mismatched prompt and presence lengths");
  }
  EmbeddedSample out;
  out.rows = sample.prompts.size();
  out.dim = provider.dim();
  out.matrix.assign(out.rows * out.dim, 0.0);
  out.mask = sample.presence;
  for (std::size_t j = 0; j < out.rows; ++j) {
    if (!sample.presence[j]) continue;
    Embedding vec;
    try {
      vec = provider.Embed(sample.prompts[j]);
    } catch (const StoreMiss& miss) {
      throw DataError(miss.what(), row_number ? std::optional<std::size_t>(row_number) : std::nullopt,
                      "#" + std::to_string(j));
    }
    if (vec.size() != out.dim) {
      throw ShapeError("provider returned " + std::to_string(vec.size()) + " values, expected " +
                       std::to_string(out.dim));
    }
    std::copy(vec.begin(), vec.end(), out.matrix.begin() + static_cast<std::ptrdiff_t>(j * out.dim));
  }
  return out;
}

}  // namespace cellformer
