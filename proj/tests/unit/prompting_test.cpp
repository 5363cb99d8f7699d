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

#include <gtest/gtest.h>

#include "rlrag/error.hpp"

namespace rlrag {
namespace {

PromptTemplate Simple() { return {0, "t", "T={task} Q={query} C={context} end"}; }

TEST(RenderTest, FillsTaskAndQueryOnly) {
  EXPECT_EQ(RenderPrompt(Simple(), "QA", "why"), "T=QA Q=why C={context} end");
}

TEST(RenderTest, InsertedTextIsNotRescanned) {
  EXPECT_EQ(RenderPrompt(Simple(), "{query}", "{task}"), "T={query} Q={task} C={context} end");
  EXPECT_THROW(RenderPrompt(Simple(), "a", "{context}"), Error);
}

TEST(RenderTest, MalformedTemplatesAreRejected) {
  EXPECT_THROW(ValidateTemplate({0, "x", "{task} {query}"}), Error);
  EXPECT_THROW(ValidateTemplate({0, "x", "{task} {query} {context} {task}"}), Error);
  try {
    ValidateTemplate({3, "x", "{context}"});
    FAIL();
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("missing {task}"), std::string::npos) << msg;
    EXPECT_NE(msg.find("missing {query}"), std::string::npos) << msg;
  }
}

TEST(TemplateLibraryTest, DefaultsAreValidAndRoundTrip) {
  const auto lib = DefaultTemplates();
  ASSERT_EQ(lib.size(), 4u);
  for (const auto& t : lib) EXPECT_NO_THROW(ValidateTemplate(t));
  const auto back = ParseTemplateLibrary(TemplateLibraryToJson(lib));
  ASSERT_EQ(back.size(), lib.size());
  for (std::size_t i = 0; i < lib.size(); ++i) {
    EXPECT_EQ(back[i].template_id, lib[i].template_id);
    EXPECT_EQ(back[i].style, lib[i].style);
    EXPECT_EQ(back[i].body, lib[i].body);
  }
}

TEST(TemplateLibraryTest, IdsMustBeDense) {
  auto j = TemplateLibraryToJson(DefaultTemplates());
  j[1]["template_id"] = 7;
  EXPECT_THROW(ParseTemplateLibrary(j), Error);
  EXPECT_THROW(ParseTemplateLibrary(nlohmann::json::array()), Error);
  EXPECT_THROW(ParseTemplateLibrary(nlohmann::json::object()), Error);
}

TEST(AggregateTest, SingleGroupFormat) {
  const std::vector<std::vector<Document>> groups{
      {Document::Make("a", "alpha one"), Document::Make("b", "beta")}};
  const auto out = Aggregate("head {context} tail", groups, 100);
  EXPECT_EQ(out.final_text, "head [doc:a] alpha one\n---\n[doc:b] beta tail");
  EXPECT_TRUE(out.dropped_doc_ids.empty());
  ASSERT_EQ(out.parts.size(), 1u);
  EXPECT_EQ(out.parts[0].doc_ids, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(out.token_count, CountWhitespaceTokens(out.final_text));
}

TEST(AggregateTest, DropsFromTheEndUntilItFits) {
  const std::vector<std::vector<Document>> groups{{Document::Make("a", "one two three"),
                                                   Document::Make("b", "four five"),
                                                   Document::Make("c", "six")}};
  // Empty context: "h  t" -> 2 tokens. Each doc adds 1 id token plus its
  // words, separators add one token.
  const auto out = Aggregate("h {context} t", groups, 8);
  EXPECT_EQ(out.dropped_doc_ids, (std::vector<std::string>{"c", "b"}));
  EXPECT_EQ(out.IncludedDocIds(), (std::vector<std::string>{"a"}));
  EXPECT_LE(out.token_count, 8u);
}

TEST(AggregateTest, EmptySupportLeavesContextEmpty) {
  const auto out = Aggregate("a {context} b", {{}}, 5);
  EXPECT_EQ(out.final_text, "a  b");
  EXPECT_TRUE(out.IncludedDocIds().empty());
}

TEST(AggregateTest, BudgetBelowTheBarePromptIsAnError) {
  EXPECT_THROW(Aggregate("one two three {context}", {{Document::Make("a", "x")}}, 2), Error);
  EXPECT_THROW(Aggregate("no slot", {{}}, 100), Error);
  EXPECT_THROW(Aggregate("{context}{context}", {{}}, 100), Error);
}

TEST(AggregateTest, MultipleGroupsSplitThePrompt) {
  const std::vector<std::vector<Document>> groups{{Document::Make("a", "x")},
                                                  {Document::Make("b", "y")}};
  const auto out = Aggregate("H {context} T", groups, 100);
  EXPECT_EQ(out.final_text, "PART 1/2: H [doc:a] x\nPART 2/2: [doc:b] y T");
  ASSERT_EQ(out.parts.size(), 2u);
  EXPECT_EQ(out.parts[0].section, "H ");
  EXPECT_EQ(out.parts[1].section, " T");
  EXPECT_EQ(out.parts[1].doc_ids, (std::vector<std::string>{"b"}));
}

TEST(AggregateTest, MultiGroupDropsFromLastNonEmptyGroup) {
  const std::vector<std::vector<Document>> groups{
      {Document::Make("a", "x"), Document::Make("b", "y")}, {}};
  const auto out = Aggregate("{context}", groups, 6);
  EXPECT_EQ(out.dropped_doc_ids, (std::vector<std::string>{"b"}));
}

}  // namespace
}  // namespace rlrag
