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
#ifndef CELLFORMER_EMBED_EMBEDDING_HPP_
#define CELLFORMER_EMBED_EMBEDDING_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cellformer/prompt/render.hpp"

namespace cellformer {

using Embedding = std::vector<double>;

// ---- Hash embedder ----

// Deterministic bag-of-tokens sentence vector. Tokens are maximal runs of
// ASCII alphanumerics or non-ASCII bytes, lowercased. Each token hashes with
// FNV-1a 64 (XOR seed) and seeds a splitmix64 stream of `dim` values in
// [-1, 1]; token vectors are mean-pooled and L2-normalised. Text without
// tokens maps to the zero vector.
Embedding HashEmbed(std::string_view text, std::size_t dim, std::uint64_t seed);

std::vector<std::string> Tokenize(std::string_view text);
std::uint64_t Fnv1a64(std::string_view bytes);

// ---- CEMB v1 store ----

// Lowercase hex SHA-256 of the UTF-8 prompt text.
std::string ContentKey(std::string_view text);

struct StoreMetadata {
  std::string version = "CEMB1";
  std::size_t dim = 0;
  bool normalized = false;
  std::string producer;
  // Header fields beyond the required ones (exporter model name, token limit, ...).
  std::map<std::string, std::string> extra;
};

// Immutable map from content key to pooled sentence vector. Values are held as
// doubles but are exactly representable as 32-bit floats.
//
// File layout, one JSON object per line:
//   {"version":"CEMB1","dim":768,"count":N,"normalized":true,"producer":"..."}
//   {"key":"<64 hex>","vec":[...dim numbers...]}   x N
class EmbeddingStore {
 public:
  static EmbeddingStore Open(const std::filesystem::path& path);
  static EmbeddingStore Parse(std::istream& in, const std::string& source_name = "<stream>");

  const StoreMetadata& metadata() const { return metadata_; }
  std::size_t dim() const { return metadata_.dim; }
  std::size_t size() const { return entries_.size(); }
  bool Contains(std::string_view text) const;

  // Stored vector for `text`; the zero vector for "" without consulting the
  // map. Throws StoreMiss when absent.
  Embedding Lookup(std::string_view text) const;
  const Embedding* FindByKey(const std::string& key) const;

 private:
  StoreMetadata metadata_;
  std::unordered_map<std::string, Embedding> entries_;
};

// Writes a CEMB v1 file. Texts are keyed by ContentKey; a repeated text must
// carry the same vector and is stored once. With `normalize`, vectors are
// scaled to unit length before writing and the header says so.
void WriteStore(std::span<const std::pair<std::string, Embedding>> entries,
                const std::filesystem::path& path, bool normalize,
                const std::string& producer = "cellformer");

// ---- Providers ----

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::size_t dim() const = 0;
  // Same text gives the same vector for the lifetime of the provider.
  virtual Embedding Embed(std::string_view text) const = 0;
  // Short description recorded in manifests and checkpoints.
  virtual std::string Describe() const = 0;
};

class HashEmbeddingProvider : public EmbeddingProvider {
 public:
  HashEmbeddingProvider(std::size_t dim, std::uint64_t seed);
  std::size_t dim() const override { return dim_; }
  Embedding Embed(std::string_view text) const override;
  std::string Describe() const override;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

class StoreEmbeddingProvider : public EmbeddingProvider {
 public:
  explicit StoreEmbeddingProvider(std::shared_ptr<const EmbeddingStore> store);
  std::size_t dim() const override { return store_->dim(); }
  Embedding Embed(std::string_view text) const override;
  std::string Describe() const override;

 private:
  std::shared_ptr<const EmbeddingStore> store_;
};

// m x dim row-major cell embeddings plus the presence mask. Rows whose mask is
// false are all zero.
struct EmbeddedSample {
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::vector<double> matrix;
  std::vector<bool> mask;

  std::span<const double> row(std::size_t j) const { return {matrix.data() + j * dim, dim}; }
  bool operator==(const EmbeddedSample&) const = default;
};

// Row j is provider.Embed(prompts[j]) when present, zeros otherwise. Store
// misses are rethrown as DataError naming `row_number` and the column index.
EmbeddedSample EmbedSample(const EmbeddingProvider& provider, const PromptedSample& sample,
                           std::size_t row_number = 0);

}  // namespace cellformer

#endif  // CELLFORMER_EMBED_EMBEDDING_HPP_
