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
#include "cellformer/train/config.hpp"

#include <charconv>
#include <fstream>
#include <iterator>
#include <set>

#include <nlohmann/json.hpp>

#include "cellformer/error.hpp"
#include "cellformer/format.hpp"

namespace cellformer {
namespace {

using nlohmann::json;

void RejectUnknownKeys(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw InvalidArgument("unknown key '" + key + "' in " + where);
  }
}

std::filesystem::path Resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  if (path.is_absolute() || base.empty()) return path;
  return base / path;
}

std::uint64_t ParseU64(std::string_view text) {
  const auto t = Trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw InvalidArgument("'" + std::string(t) + "' is not a non-negative integer");
  }
  return v;
}

}  // namespace

std::shared_ptr<const EmbeddingProvider> EmbedderConfig::Create() const {
  if (kind == EmbedderKind::kStore) {
    if (store.empty()) throw InvalidArgument("store embedder needs a store path");
    return std::make_shared<StoreEmbeddingProvider>(
        std::make_shared<const EmbeddingStore>(EmbeddingStore::Open(store)));
  }
  return std::make_shared<HashEmbeddingProvider>(dim, seed);
}

double TrainConfig::lr() const {
  if (learning_rate) return *learning_rate;
  return head == HeadKind::kCoral ? 5e-5 : 1e-5;
}

void TrainConfig::Validate() const {
  if (batch_size == 0) throw InvalidArgument("batch_size must be >= 1");
  if (max_epochs == 0) throw InvalidArgument("max_epochs must be >= 1");
  if (seeds.empty()) throw InvalidArgument("at least one seed is required");
  if (!(lr() > 0.0)) throw InvalidArgument("learning rate must be positive");
  for (double r : rates) {
    if (!(r >= 0.0 && r <= 1.0)) throw InvalidArgument("corruption rate " + FormatNumber(r) + " outside [0, 1]");
  }
  if (!data.empty() && schema.empty()) throw InvalidArgument("a data CSV needs a schema file");
  if (data.empty() && synth.n < 10) throw InvalidArgument("synthetic datasets need n >= 10");
  if (synth.variant != "text" && synth.variant != "tabular") {
    throw InvalidArgument("synth.variant must be 'text' or 'tabular'");
  }
  if (embedder.kind == EmbedderKind::kHash && embedder.dim == 0) {
    throw InvalidArgument("embedder.dim must be >= 1");
  }
  if (embedder.kind == EmbedderKind::kStore && embedder.store.empty()) {
    throw InvalidArgument("embedder.kind 'store' needs embedder.path");
  }
  if (model == Architecture::kCellTransformer) {
    EncoderConfig probe = encoder;
    probe.input_dim = 1;
    probe.Validate();
  } else if (mlp_hidden == 0) {
    throw InvalidArgument("mlp_hidden must be >= 1");
  }
}

std::string TrainConfig::ToJson(bool include_out_dir) const {
  nlohmann::ordered_json j;
  j["model"] = ArchitectureName(model);
  j["head"] = HeadName(head);
  j["learning_rate"] = lr();
  j["batch_size"] = batch_size;
  j["max_epochs"] = max_epochs;
  j["patience"] = patience;
  j["seeds"] = seeds;
  j["split_seed"] = split_seed;
  j["encoder"] = {{"model_dim", encoder.model_dim},
                  {"layers", encoder.layers},
                  {"heads", encoder.heads},
                  {"ffn_dim", encoder.ffn_dim},
                  {"adapter_trainable", encoder.adapter_trainable}};
  j["head_hidden"] = head_hidden;
  j["mlp_hidden"] = mlp_hidden;
  j["embedder"] = {{"kind", embedder.kind == EmbedderKind::kStore ? "store" : "hash"},
                   {"dim", embedder.dim},
                   {"seed", embedder.seed},
                   {"path", embedder.store.string()}};
  j["data"] = data.string();
  j["schema"] = schema.string();
  j["synth"] = {{"n", synth.n},
                {"seed", synth.seed},
                {"variant", synth.variant},
                {"missing_text_fraction", synth.missing_text_fraction}};
  j["rates"] = rates;
  if (include_out_dir) j["out_dir"] = out_dir.string();
  return j.dump(2);
}

TrainConfig TrainConfig::FromJson(std::string_view text, const std::filesystem::path& base_dir) {
  TrainConfig c;
  try {
    const auto j = json::parse(text);
    if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
    RejectUnknownKeys(j,
                      {"model", "head", "learning_rate", "batch_size", "max_epochs", "patience",
                       "seeds", "split_seed", "encoder", "head_hidden", "mlp_hidden", "embedder",
                       "data", "schema", "synth", "rates", "out_dir"},
                      "config");
    if (j.contains("model")) c.model = ParseArchitecture(j["model"].get<std::string>());
    if (j.contains("head")) c.head = ParseHead(j["head"].get<std::string>());
    if (j.contains("learning_rate") && !j["learning_rate"].is_null()) {
      c.learning_rate = j["learning_rate"].get<double>();
    }
    if (j.contains("batch_size")) c.batch_size = j["batch_size"].get<std::size_t>();
    if (j.contains("max_epochs")) c.max_epochs = j["max_epochs"].get<std::size_t>();
    if (j.contains("patience")) c.patience = j["patience"].get<std::size_t>();
    if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (j.contains("split_seed")) c.split_seed = j["split_seed"].get<std::uint64_t>();
    if (j.contains("encoder")) {
      const auto& e = j["encoder"];
      RejectUnknownKeys(e, {"model_dim", "layers", "heads", "ffn_dim", "adapter_trainable"}, "encoder");
      c.encoder.model_dim = e.value("model_dim", c.encoder.model_dim);
      c.encoder.layers = e.value("layers", c.encoder.layers);
      c.encoder.heads = e.value("heads", c.encoder.heads);
      c.encoder.ffn_dim = e.value("ffn_dim", c.encoder.ffn_dim);
      c.encoder.adapter_trainable = e.value("adapter_trainable", c.encoder.adapter_trainable);
    }
    if (j.contains("head_hidden")) c.head_hidden = j["head_hidden"].get<std::size_t>();
    if (j.contains("mlp_hidden")) c.mlp_hidden = j["mlp_hidden"].get<std::size_t>();
    if (j.contains("embedder")) {
      const auto& e = j["embedder"];
      RejectUnknownKeys(e, {"kind", "dim", "seed", "path"}, "embedder");
      const auto kind = e.value("kind", std::string("hash"));
      if (kind == "hash") {
        c.embedder.kind = EmbedderKind::kHash;
      } else if (kind == "store") {
        c.embedder.kind = EmbedderKind::kStore;
      } else {
        throw InvalidArgument("embedder.kind must be 'hash' or 'store', got '" + kind + "'");
      }
      c.embedder.dim = e.value("dim", c.embedder.dim);
      c.embedder.seed = e.value("seed", c.embedder.seed);
      c.embedder.store = Resolve(base_dir, e.value("path", std::string()));
    }
    if (j.contains("data")) c.data = Resolve(base_dir, j["data"].get<std::string>());
    if (j.contains("schema")) c.schema = Resolve(base_dir, j["schema"].get<std::string>());
    if (j.contains("synth")) {
      const auto& s = j["synth"];
      RejectUnknownKeys(s, {"n", "seed", "variant", "missing_text_fraction"}, "synth");
      c.synth.n = s.value("n", c.synth.n);
      c.synth.seed = s.value("seed", c.synth.seed);
      c.synth.variant = s.value("variant", c.synth.variant);
      c.synth.missing_text_fraction = s.value("missing_text_fraction", c.synth.missing_text_fraction);
    }
    if (j.contains("rates")) c.rates = j["rates"].get<std::vector<double>>();
    if (j.contains("out_dir")) c.out_dir = Resolve(base_dir, j["out_dir"].get<std::string>());
    c.Validate();
  } catch (const json::exception& e) {
    throw FormatError(std::string("config: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  return c;
}

TrainConfig TrainConfig::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return FromJson(text, path.parent_path());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint64_t> ParseSeedList(std::string_view text) {
  std::vector<std::uint64_t> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = text.substr(start, comma == std::string_view::npos ? text.npos : comma - start);
    const auto dash = item.find('-');
    if (dash != std::string_view::npos) {
      const auto lo = ParseU64(item.substr(0, dash));
      const auto hi = ParseU64(item.substr(dash + 1));
      if (hi < lo) throw InvalidArgument("seed range '" + std::string(item) + "' is descending");
      for (auto s = lo; s <= hi; ++s) out.push_back(s);
    } else {
      out.push_back(ParseU64(item));
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<double> ParseRateList(std::string_view text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    const auto item = text.substr(start, comma == std::string_view::npos ? text.npos : comma - start);
    const auto value = ParseNumber(item);
    if (!value || *value < 0.0 || *value > 1.0) {
      throw InvalidArgument("'" + std::string(Trim(item)) + "' is not a rate in [0, 1]");
    }
    out.push_back(*value);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace cellformer
