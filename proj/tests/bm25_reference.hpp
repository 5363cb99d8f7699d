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

// Full-scan BM25 written against the formula, not the index. The operation
// order matches InvertedIndex so equal scores compare equal.
#ifndef RLRAG_TESTS_BM25_REFERENCE_HPP_
#define RLRAG_TESTS_BM25_REFERENCE_HPP_

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "rlrag/corpus.hpp"

namespace rlrag::testing {

inline std::vector<ScoredDoc> BruteForceRank(const std::vector<Document>& docs,
                                             const std::vector<std::string>& query) {
  const double n = static_cast<double>(docs.size());
  double total = 0.0;
  for (const auto& d : docs) total += static_cast<double>(d.tokens.size());
  const double avg = total / n;
  std::vector<ScoredDoc> out;
  for (const auto& d : docs) {
    double s = 0.0;
    bool hit = false;
    for (const auto& q : query) {
      const auto tf = std::count(d.tokens.begin(), d.tokens.end(), q);
      if (tf == 0) continue;
      double df = 0.0;
      for (const auto& e : docs) {
        if (std::find(e.tokens.begin(), e.tokens.end(), q) != e.tokens.end()) df += 1.0;
      }
      const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
      const double f = static_cast<double>(tf);
      const double norm = 1.0 - 0.75 + 0.75 * static_cast<double>(d.tokens.size()) / avg;
      s += idf * f * (1.2 + 1.0) / (f + 1.2 * norm);
      hit = true;
    }
    if (hit && s > 0.0) out.push_back({d.id, s});
  }
  std::sort(out.begin(), out.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
  });
  return out;
}

}  // namespace rlrag::testing

#endif  // RLRAG_TESTS_BM25_REFERENCE_HPP_
