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

#include "rlrag/corpus.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "rlrag/error.hpp"
#include "rlrag/io.hpp"

namespace rlrag {
namespace {

bool IsWordByte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z') || c >= 0x80;
}

constexpr int kIndexFormatVersion = 1;

}  // namespace

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (IsWordByte(c)) {
      current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a')
                                             : ch);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Document Document::Make(std::string id, std::string text,
                        std::map<std::string, std::string> meta) {
  Document doc;
  doc.id = std::move(id);
  doc.text = std::move(text);
  doc.tokens = Tokenize(doc.text);
  doc.meta = std::move(meta);
  return doc;
}

InvertedIndex InvertedIndex::Build(std::vector<Document> docs,
                                   Bm25Params params) {
  std::sort(docs.begin(), docs.end(),
            [](const Document& a, const Document& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (docs[i].id.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "document with empty id");
    }
    if (i > 0 && docs[i].id == docs[i - 1].id) {
      throw Error(ErrorCode::kDuplicateId,
                  fmt::format("duplicate document id '{}'", docs[i].id));
    }
  }

  InvertedIndex index;
  index.params_ = params;
  index.docs_ = std::move(docs);
  index.doc_len_.reserve(index.docs_.size());
  for (std::uint32_t d = 0; d < index.docs_.size(); ++d) {
    Document& doc = index.docs_[d];
    doc.tokens = Tokenize(doc.text);
    index.id_to_index_.emplace(doc.id, d);
    index.doc_len_.push_back(doc.tokens.size());
    index.total_len_ += doc.tokens.size();

    std::map<std::string_view, std::uint32_t> tf;
    for (const auto& t : doc.tokens) ++tf[t];
    // Docs are visited in id order, so each postings list stays sorted.
    for (const auto& [term, count] : tf) {
      index.postings_[std::string(term)].push_back(Posting{d, count});
    }
  }
  return index;
}

std::optional<double> InvertedIndex::avg_doc_len() const {
  if (docs_.empty()) return std::nullopt;
  return static_cast<double>(total_len_) / static_cast<double>(docs_.size());
}

std::size_t InvertedIndex::df(const std::string& term) const {
  auto it = postings_.find(term);
  return it == postings_.end() ? 0 : it->second.size();
}

std::span<const Posting> InvertedIndex::postings(const std::string& term) const {
  auto it = postings_.find(term);
  if (it == postings_.end()) return {};
  return it->second;
}

std::size_t InvertedIndex::IndexOf(const std::string& doc_id) const {
  auto it = id_to_index_.find(doc_id);
  if (it == id_to_index_.end()) {
    throw Error(ErrorCode::kNotFound,
                fmt::format("unknown document id '{}'", doc_id));
  }
  return it->second;
}

std::size_t InvertedIndex::doc_len(const std::string& doc_id) const {
  return doc_len_[IndexOf(doc_id)];
}

bool InvertedIndex::contains(const std::string& doc_id) const {
  return id_to_index_.count(doc_id) != 0;
}

const Document& InvertedIndex::document(const std::string& doc_id) const {
  return docs_[IndexOf(doc_id)];
}

double InvertedIndex::idf(const std::string& term) const {
  const double n = static_cast<double>(docs_.size());
  const double dfv = static_cast<double>(df(term));
  return std::log(1.0 + (n - dfv + 0.5) / (dfv + 0.5));
}

double InvertedIndex::TermScore(double idf, std::uint32_t tf,
                                std::size_t doc_len) const {
  const double avg = static_cast<double>(total_len_) /
                     static_cast<double>(docs_.size());
  const double f = static_cast<double>(tf);
  const double norm =
      1.0 - params_.b + params_.b * static_cast<double>(doc_len) / avg;
  return idf * f * (params_.k1 + 1.0) / (f + params_.k1 * norm);
}

double InvertedIndex::Score(std::span<const std::string> query_tokens,
                            const std::string& doc_id) const {
  const std::size_t d = IndexOf(doc_id);
  double score = 0.0;
  for (const auto& term : query_tokens) {
    auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    const auto& list = it->second;
    auto p = std::lower_bound(
        list.begin(), list.end(), d,
        [](const Posting& lhs, std::size_t rhs) { return lhs.doc < rhs; });
    if (p == list.end() || p->doc != d) continue;
    score += TermScore(idf(term), p->tf, doc_len_[d]);
  }
  return score;
}

CandidatePool InvertedIndex::TopN(std::span<const std::string> query_tokens,
                                  std::size_t n, std::string query_id) const {
  if (n == 0) {
    throw Error(ErrorCode::kInvalidArgument, "top_n requires n >= 1");
  }
  CandidatePool pool;
  pool.query_id = std::move(query_id);
  if (docs_.empty()) return pool;

  std::vector<double> acc(docs_.size(), 0.0);
  std::vector<char> touched(docs_.size(), 0);
  for (const auto& term : query_tokens) {
    auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    const double term_idf = idf(term);
    for (const Posting& p : it->second) {
      acc[p.doc] += TermScore(term_idf, p.tf, doc_len_[p.doc]);
      touched[p.doc] = 1;
    }
  }
  std::vector<std::uint32_t> hits;
  for (std::uint32_t d = 0; d < docs_.size(); ++d) {
    if (touched[d] && acc[d] > 0.0) hits.push_back(d);
  }
  // Dense index order is id order, so comparing indices breaks ties by id.
  auto better = [&](std::uint32_t a, std::uint32_t b) {
    if (acc[a] != acc[b]) return acc[a] > acc[b];
    return a < b;
  };
  const std::size_t keep = std::min(n, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<long>(keep),
                    hits.end(), better);
  pool.entries.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    pool.entries.push_back(ScoredDoc{docs_[hits[i]].id, acc[hits[i]]});
  }
  return pool;
}

nlohmann::json InvertedIndex::ToJson() const {
  nlohmann::json docs = nlohmann::json::array();
  for (std::size_t d = 0; d < docs_.size(); ++d) {
    docs.push_back({{"id", docs_[d].id},
                    {"text", docs_[d].text},
                    {"meta", docs_[d].meta},
                    {"len", doc_len_[d]}});
  }
  nlohmann::json postings = nlohmann::json::object();
  for (const auto& [term, list] : postings_) {
    nlohmann::json entries = nlohmann::json::array();
    for (const Posting& p : list) {
      entries.push_back(nlohmann::json::array({docs_[p.doc].id, p.tf}));
    }
    postings[term] = std::move(entries);
  }
  nlohmann::json j = {{"version", kIndexFormatVersion},
                      {"k1", params_.k1},
                      {"b", params_.b},
                      {"doc_count", docs_.size()},
                      {"docs", std::move(docs)},
                      {"postings", std::move(postings)}};
  if (auto avg = avg_doc_len()) j["avg_doc_len"] = *avg;
  return j;
}

InvertedIndex InvertedIndex::FromJson(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != kIndexFormatVersion) {
      throw Error(ErrorCode::kCorruptData, "unsupported index version");
    }
    std::vector<Document> docs;
    for (const auto& d : j.at("docs")) {
      docs.push_back(Document::Make(
          d.at("id").get<std::string>(), d.at("text").get<std::string>(),
          d.at("meta").get<std::map<std::string, std::string>>()));
    }
    Bm25Params params{j.at("k1").get<double>(), j.at("b").get<double>()};
    InvertedIndex index = Build(std::move(docs), params);
    // The postings are derived data; a mismatch means the file was edited.
    if (index.ToJson() != j) {
      throw Error(ErrorCode::kCorruptData,
                  "index file postings disagree with its documents");
    }
    return index;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorruptData,
                fmt::format("malformed index file: {}", e.what()));
  }
}

std::vector<Document> ParseCorpusJsonl(std::string_view content,
                                       const std::string& source) {
  std::vector<Document> docs;
  ForEachJsonLine(content, source, [&](const nlohmann::json& j,
                                        std::size_t line) {
    const std::string where = fmt::format("{}:{}", source, line);
    RequireOnlyKeys(j, {"id", "text", "meta"}, where);
    if (!j.contains("id") || !j["id"].is_string() || !j.contains("text") ||
        !j["text"].is_string()) {
      throw Error(ErrorCode::kSchema,
                  fmt::format("{}: 'id' and 'text' must be strings", where));
    }
    std::map<std::string, std::string> meta;
    if (j.contains("meta")) {
      if (!j["meta"].is_object()) {
        throw Error(ErrorCode::kSchema,
                    fmt::format("{}: 'meta' must be an object", where));
      }
      for (const auto& [k, v] : j["meta"].items()) {
        if (!v.is_string()) {
          throw Error(ErrorCode::kSchema,
                      fmt::format("{}: meta value '{}' is not a string", where,
                                  k));
        }
        meta.emplace(k, v.get<std::string>());
      }
    }
    docs.push_back(Document::Make(j["id"].get<std::string>(),
                                  j["text"].get<std::string>(),
                                  std::move(meta)));
  });
  return docs;
}

std::vector<Document> ReadCorpusJsonl(const std::string& path) {
  return ParseCorpusJsonl(ReadFile(path), path);
}

std::string WriteCorpusJsonl(std::span<const Document> docs) {
  std::string out;
  for (const auto& d : docs) {
    nlohmann::json j = {{"id", d.id}, {"text", d.text}, {"meta", d.meta}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace rlrag
