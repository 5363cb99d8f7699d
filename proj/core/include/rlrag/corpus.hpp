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

#ifndef RLRAG_CORPUS_HPP_
#define RLRAG_CORPUS_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace rlrag {

// Lowercases ASCII letters and splits on every run of ASCII characters that
// are not letters or digits. Bytes >= 0x80 count as word characters so UTF-8
// words stay whole.
std::vector<std::string> Tokenize(std::string_view text);

struct Document {
  std::string id;
  std::string text;
  std::vector<std::string> tokens;  // always Tokenize(text)
  std::map<std::string, std::string> meta;

  static Document Make(std::string id, std::string text,
                       std::map<std::string, std::string> meta = {});
};

struct Posting {
  std::uint32_t doc;  // dense index into InvertedIndex::documents()
  std::uint32_t tf;
};

struct ScoredDoc {
  std::string doc_id;
  double score = 0.0;
};

// Top-N first-stage candidates for one query, sorted by score descending
// with doc id ascending as the tie-break.
struct CandidatePool {
  std::string query_id;
  std::vector<ScoredDoc> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  double max_score() const { return entries.empty() ? 0.0 : entries[0].score; }
};

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

// Immutable after construction; safe for concurrent readers.
class InvertedIndex {
 public:
  InvertedIndex() = default;

  // Throws Error(kDuplicateId) naming the first repeated id.
  static InvertedIndex Build(std::vector<Document> docs,
                             Bm25Params params = {});

  std::size_t doc_count() const { return docs_.size(); }
  // nullopt for an empty corpus.
  std::optional<double> avg_doc_len() const;
  std::size_t df(const std::string& term) const;
  std::span<const Posting> postings(const std::string& term) const;
  std::size_t doc_len(const std::string& doc_id) const;
  bool contains(const std::string& doc_id) const;
  const Document& document(const std::string& doc_id) const;
  // Sorted by id ascending.
  const std::vector<Document>& documents() const { return docs_; }
  const Bm25Params& params() const { return params_; }

  double idf(const std::string& term) const;

  // Okapi BM25 summed over the query token sequence (a repeated query token
  // contributes once per occurrence). Throws Error(kNotFound) for an
  // unknown doc id.
  double Score(std::span<const std::string> query_tokens,
               const std::string& doc_id) const;

  // The n best docs with score > 0; n must be >= 1.
  CandidatePool TopN(std::span<const std::string> query_tokens, std::size_t n,
                     std::string query_id = {}) const;

  nlohmann::json ToJson() const;
  static InvertedIndex FromJson(const nlohmann::json& j);

 private:
  std::size_t IndexOf(const std::string& doc_id) const;
  double TermScore(double idf, std::uint32_t tf, std::size_t doc_len) const;

  Bm25Params params_;
  std::vector<Document> docs_;
  std::vector<std::size_t> doc_len_;
  std::unordered_map<std::string, std::uint32_t> id_to_index_;
  std::map<std::string, std::vector<Posting>> postings_;
  std::uint64_t total_len_ = 0;
};

// Corpus JSONL: {"id": string, "text": string, "meta": {string: string}}.
// "meta" may be omitted; any other key is rejected.
std::vector<Document> ReadCorpusJsonl(const std::string& path);
std::vector<Document> ParseCorpusJsonl(std::string_view content,
                                       const std::string& source = "<memory>");
std::string WriteCorpusJsonl(std::span<const Document> docs);

}  // namespace rlrag

#endif  // RLRAG_CORPUS_HPP_
