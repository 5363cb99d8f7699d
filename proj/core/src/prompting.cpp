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

#include "rlrag/prompting.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>

#include "rlrag/error.hpp"

namespace rlrag {
namespace {

std::size_t CountOccurrences(std::string_view haystack, std::string_view needle) {
  std::size_t count = 0;
  for (std::size_t pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

std::string RenderGroup(const std::vector<Document>& docs, std::size_t keep) {
  std::string out;
  for (std::size_t i = 0; i < keep; ++i) {
    if (i > 0) out += "\n---\n";
    out += "[doc:";
    out += docs[i].id;
    out += "] ";
    out += docs[i].text;
  }
  return out;
}

struct SplitPrompt {
  std::string_view head;
  std::string_view tail;
};

std::string Render(const SplitPrompt& prompt,
                   const std::vector<std::vector<Document>>& groups,
                   const std::vector<std::size_t>& keep) {
  if (groups.size() <= 1) {
    std::string out(prompt.head);
    if (!groups.empty()) out += RenderGroup(groups[0], keep[0]);
    out += prompt.tail;
    return out;
  }
  const std::size_t m = groups.size();
  std::string out;
  for (std::size_t i = 0; i < m; ++i) {
    if (i > 0) out += '\n';
    out += fmt::format("PART {}/{}: ", i + 1, m);
    if (i == 0) out += prompt.head;
    out += RenderGroup(groups[i], keep[i]);
    if (i + 1 == m) out += prompt.tail;
  }
  return out;
}

}  // namespace

void ValidateTemplate(const PromptTemplate& tmpl) {
  std::vector<std::string> problems;
  for (std::string_view slot : {kTaskSlot, kQuerySlot, kContextSlot}) {
    const std::size_t n = CountOccurrences(tmpl.body, slot);
    if (n == 0) problems.push_back(fmt::format("missing {}", slot));
    if (n > 1) problems.push_back(fmt::format("duplicate {} (x{})", slot, n));
  }
  if (!problems.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("malformed template {}: {}", tmpl.template_id,
                            fmt::join(problems, ", ")));
  }
}

std::string RenderPrompt(const PromptTemplate& tmpl,
                         std::string_view task_description,
                         std::string_view query) {
  ValidateTemplate(tmpl);
  if (task_description.find(kContextSlot) != std::string_view::npos ||
      query.find(kContextSlot) != std::string_view::npos) {
    throw Error(ErrorCode::kInvalidArgument,
                "task description and query may not contain '{context}'");
  }
  // Substitute whichever slot comes later first so earlier offsets stay
  // valid and inserted text is never rescanned.
  std::string out = tmpl.body;
  const std::size_t task_pos = out.find(kTaskSlot);
  const std::size_t query_pos = out.find(kQuerySlot);
  if (task_pos > query_pos) {
    out.replace(task_pos, kTaskSlot.size(), task_description);
    out.replace(query_pos, kQuerySlot.size(), query);
  } else {
    out.replace(query_pos, kQuerySlot.size(), query);
    out.replace(task_pos, kTaskSlot.size(), task_description);
  }
  return out;
}

std::vector<PromptTemplate> DefaultTemplates() {
  return {
      {0, "terse",
       "Task: {task}\nQuestion: {query}\nContext:\n{context}\nAnswer briefly."},
      {1, "cot",
       "You are working on the task: {task}. Read the context documents "
       "below, reason step by step about which facts answer the question, "
       "then give the final answer on its own line.\nContext:\n{context}\n"
       "Question: {query}\nReasoning:"},
      {2, "extractive",
       "{task}. Copy the answer span verbatim from the context.\n"
       "Context:\n{context}\nQuestion: {query}\nAnswer span:"},
      {3, "strict-grounding",
       "Task: {task}. Answer using only the documents below. If they do not "
       "contain the answer, reply UNKNOWN.\nDocuments:\n{context}\n"
       "Question: {query}\nAnswer:"},
  };
}

std::vector<PromptTemplate> ParseTemplateLibrary(const nlohmann::json& j) {
  if (!j.is_array()) {
    throw Error(ErrorCode::kSchema, "template library must be a JSON array");
  }
  std::vector<PromptTemplate> library;
  for (const auto& item : j) {
    if (!item.is_object() || !item.contains("template_id") ||
        !item["template_id"].is_number_integer() || !item.contains("style") ||
        !item["style"].is_string() || !item.contains("body") ||
        !item["body"].is_string()) {
      throw Error(ErrorCode::kSchema,
                  "template entries need integer template_id, string style "
                  "and string body");
    }
    PromptTemplate t{item["template_id"].get<int>(),
                     item["style"].get<std::string>(),
                     item["body"].get<std::string>()};
    ValidateTemplate(t);
    library.push_back(std::move(t));
  }
  std::sort(library.begin(), library.end(),
            [](const auto& a, const auto& b) {
              return a.template_id < b.template_id;
            });
  for (std::size_t i = 0; i < library.size(); ++i) {
    if (library[i].template_id != static_cast<int>(i)) {
      throw Error(ErrorCode::kSchema,
                  "template ids must be exactly 0..T-1 without gaps");
    }
  }
  if (library.empty()) {
    throw Error(ErrorCode::kSchema, "template library is empty");
  }
  return library;
}

nlohmann::json TemplateLibraryToJson(std::span<const PromptTemplate> library) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& t : library) {
    j.push_back({{"template_id", t.template_id},
                 {"style", t.style},
                 {"body", t.body}});
  }
  return j;
}

std::vector<std::string> AggregatedPrompt::IncludedDocIds() const {
  std::vector<std::string> ids;
  for (const auto& part : parts) {
    ids.insert(ids.end(), part.doc_ids.begin(), part.doc_ids.end());
  }
  return ids;
}

std::size_t CountWhitespaceTokens(std::string_view text) {
  std::size_t count = 0;
  bool in_token = false;
  for (char c : text) {
    const bool space = c == ' ' || c == '\n' || c == '\t' || c == '\r' ||
                       c == '\f' || c == '\v';
    if (!space && !in_token) ++count;
    in_token = !space;
  }
  return count;
}

AggregatedPrompt Aggregate(std::string_view prompt,
                           const std::vector<std::vector<Document>>& groups,
                           std::size_t context_budget) {
  const std::size_t slot_count = CountOccurrences(prompt, kContextSlot);
  if (slot_count != 1) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("prompt must contain exactly one {} slot, found {}",
                            kContextSlot, slot_count));
  }
  const std::size_t slot = prompt.find(kContextSlot);
  const SplitPrompt split{prompt.substr(0, slot),
                          prompt.substr(slot + kContextSlot.size())};

  std::vector<std::size_t> keep(groups.size(), 0);
  const std::size_t empty_tokens =
      CountWhitespaceTokens(Render(split, groups, keep));
  if (empty_tokens > context_budget) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("context budget {} is smaller than the "
                            "empty-context prompt ({} tokens)",
                            context_budget, empty_tokens));
  }

  for (std::size_t g = 0; g < groups.size(); ++g) keep[g] = groups[g].size();
  AggregatedPrompt result;
  result.final_text = Render(split, groups, keep);
  result.token_count = CountWhitespaceTokens(result.final_text);
  while (result.token_count > context_budget) {
    std::size_t g = groups.size();
    while (g > 0 && keep[g - 1] == 0) --g;
    // Unreachable: the empty rendering fits.
    if (g == 0) break;
    --keep[g - 1];
    result.dropped_doc_ids.push_back(groups[g - 1][keep[g - 1]].id);
    result.final_text = Render(split, groups, keep);
    result.token_count = CountWhitespaceTokens(result.final_text);
  }

  const std::size_t m = groups.size();
  for (std::size_t g = 0; g < m; ++g) {
    PromptPart part;
    if (m == 1) {
      part.section = std::string(prompt);
    } else if (g == 0) {
      part.section = std::string(split.head);
    } else if (g + 1 == m) {
      part.section = std::string(split.tail);
    }
    for (std::size_t i = 0; i < keep[g]; ++i) {
      part.doc_ids.push_back(groups[g][i].id);
    }
    result.parts.push_back(std::move(part));
  }
  return result;
}

}  // namespace rlrag
