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

#ifndef RLRAG_IO_HPP_
#define RLRAG_IO_HPP_

#include <functional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace rlrag {

std::string ReadFile(const std::string& path);
void WriteFile(const std::string& path, std::string_view content);

// Calls `fn(json, line_number)` for each non-blank line. Parse failures
// throw Error(kSchema) with "<source>:<line>" in the message.
void ForEachJsonLine(
    std::string_view content, const std::string& source,
    const std::function<void(const nlohmann::json&, std::size_t)>& fn);

// Throws Error(kSchema) if `obj` is not an object or has a key outside
// `allowed`.
void RequireOnlyKeys(const nlohmann::json& obj,
                     std::initializer_list<std::string_view> allowed,
                     const std::string& where);

// Compact, key-sorted dump; the canonical on-disk form.
std::string DumpCompact(const nlohmann::json& j);

}  // namespace rlrag

#endif  // RLRAG_IO_HPP_
