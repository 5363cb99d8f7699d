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

#ifndef RLRAG_PROMPTING_HPP_
#define RLRAG_PROMPTING_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rlrag/corpus.hpp"

namespace rlrag {

inline constexpr std::string_view kTaskSlot = "{task}";
inline constexpr std::string_view kQuerySlot = "{query}";
inline constexpr std::string_view kContextSlot = "{context}";

struct PromptTemplate {
  int template_id = 0;
  std::string style;
  std::string body;  // contains each slot exactly once
};

// Throws Error(kInvalidArgument) listing every missing or repeated slot.
void ValidateTemplate(const PromptTemplate& tmpl);

// Substitutes {task} and {query}; {context} is left in place for the
// aggregator. Task and query text may not themselves contain "{context}".
std::string RenderPrompt(const PromptTemplate& tmpl,
                         std::string_view task_description,
                         std::string_view query);

// The built-in library: terse, cot, extractive, strict-grounding.
std::vector<PromptTemplate> DefaultTemplates();

// JSON array of {"template_id", "style", "body"}; ids must be exactly
// 0..T-1 in any order. Returned sorted by id.
std::vector<PromptTemplate> ParseTemplateLibrary(const nlohmann::json& j);
nlohmann::json TemplateLibraryToJson(std::span<const PromptTemplate> library);

struct PromptPart {
  std::string section;  // the slice of the prompt carried by this group
  std::vector<std::string> doc_ids;
};

struct AggregatedPrompt {
  std::string final_text;
  std::vector<PromptPart> parts;
  std::vector<std::string> dropped_doc_ids;  // in drop order
  std::size_t token_count = 0;

  // Doc ids that made it into final_text, group by group.
  std::vector<std::string> IncludedDocIds() const;
};

// Number of whitespace-separated tokens.
std::size_t CountWhitespaceTokens(std::string_view text);

// Merges a rendered prompt with its support groups.
//
// One group (or none): {context} becomes the docs joined by "\n---\n", each
// prefixed "[doc:<id>] ". With m > 1 groups the prompt is split at the slot:
// "PART 1/m: " + head + group 1, "PART i/m: " + group i for the middle
// groups, and "PART m/m: " + group m + tail, joined by newlines.
//
// While the whitespace-token count exceeds `context_budget`, documents are
// dropped from the end of the last non-empty group. Throws
// Error(kInvalidArgument) if even the empty-context rendering is too long.
AggregatedPrompt Aggregate(std::string_view prompt,
                           const std::vector<std::vector<Document>>& groups,
                           std::size_t context_budget);

}  // namespace rlrag

#endif  // RLRAG_PROMPTING_HPP_
