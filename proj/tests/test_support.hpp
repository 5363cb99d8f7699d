// Shared fixture loaders for the unit and acceptance tests.
#ifndef RLRAG_TESTS_TEST_SUPPORT_HPP_
#define RLRAG_TESTS_TEST_SUPPORT_HPP_

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rlrag/corpus.hpp"
#include "rlrag/io.hpp"
#include "rlrag/reasoner.hpp"

namespace rlrag::testing {

inline std::string DataPath(const std::string& name) {
  return std::string(RLRAG_TEST_DATA_DIR) + "/" + name;
}

inline nlohmann::json Goldens() {
  return nlohmann::json::parse(ReadFile(DataPath("goldens.json")));
}

// Six docs; for "what is the color of zorb" the damaging doc ranks first
// and the gold doc second.
inline InvertedIndex FixtureIndex() {
  return InvertedIndex::Build(ReadCorpusJsonl(DataPath("fixture_corpus.jsonl")));
}

inline std::vector<TaskInstance> FixtureTasks() {
  return ReadTasksJsonl(DataPath("fixture_tasks.jsonl"));
}

}  // namespace rlrag::testing

#endif  // RLRAG_TESTS_TEST_SUPPORT_HPP_
