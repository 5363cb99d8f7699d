// Copyright 2026 The rlrag Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rlrag/checkpoint.hpp"

#include <fmt/format.h>

#include <filesystem>

#include "rlrag/error.hpp"
#include "rlrag/hash.hpp"
#include "rlrag/io.hpp"

namespace rlrag {

std::string SidecarPath(const std::string& checkpoint_path) {
  return checkpoint_path + ".meta.json";
}

void WriteCheckpoint(const std::string& path, const nn::Mlp& net,
                     const rl::TrainConfig& config, const std::string& corpus_hash) {
  const std::string bytes = net.Save();
  WriteFile(path, bytes);
  const nlohmann::json meta = {{"config", rl::ConfigToJson(config)},
                               {"corpus_hash", corpus_hash},
                               {"content_hash", GitBlobHash(bytes)}};
  WriteFile(SidecarPath(path), meta.dump(2) + "\n");
}

Checkpoint ReadCheckpoint(const std::string& path) {
  const std::string bytes = ReadFile(path);
  Checkpoint cp{nn::Mlp::Load(bytes), {}, {}, GitBlobHash(bytes)};
  const std::string meta_path = SidecarPath(path);
  if (!std::filesystem::exists(meta_path)) return cp;
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(ReadFile(meta_path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, fmt::format("{}: {}", meta_path, e.what()));
  }
  RequireOnlyKeys(meta, {"config", "corpus_hash", "content_hash"}, meta_path);
  if (meta.contains("content_hash") &&
      meta["content_hash"].get<std::string>() != cp.content_hash) {
    throw Error(ErrorCode::kCorruptData,
                fmt::format("'{}' does not match the content hash in '{}'", path, meta_path));
  }
  if (meta.contains("config")) cp.config = rl::ConfigFromJson(meta["config"]);
  if (meta.contains("corpus_hash")) cp.corpus_hash = meta["corpus_hash"].get<std::string>();
  return cp;
}

std::string CorpusHash(std::span<const Document> docs) {
  return Sha256Hex(WriteCorpusJsonl(docs));
}

}  // namespace rlrag
