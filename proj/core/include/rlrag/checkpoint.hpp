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

#ifndef RLRAG_CHECKPOINT_HPP_
#define RLRAG_CHECKPOINT_HPP_

#include <string>

#include <nlohmann/json.hpp>

#include "rlrag/tinynn.hpp"
#include "rlrag/trainer.hpp"

namespace rlrag {

// A trained Q-network on disk: the network JSON at `path` and a sidecar at
// `path` + ".meta.json" holding {"config", "corpus_hash", "content_hash"}.
// content_hash is the git blob hash of the network file.
struct Checkpoint {
  nn::Mlp net;
  rl::TrainConfig config;
  std::string corpus_hash;   // sha256 of the corpus the net was trained on
  std::string content_hash;
};

std::string SidecarPath(const std::string& checkpoint_path);

void WriteCheckpoint(const std::string& path, const nn::Mlp& net,
                     const rl::TrainConfig& config, const std::string& corpus_hash);

// Verifies content_hash against the network file when a sidecar exists;
// without one the config is the default.
Checkpoint ReadCheckpoint(const std::string& path);

// sha256 over the canonical corpus JSONL of the documents.
std::string CorpusHash(std::span<const Document> docs);

}  // namespace rlrag

#endif  // RLRAG_CHECKPOINT_HPP_
