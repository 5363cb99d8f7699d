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

#ifndef RLRAG_HASH_HPP_
#define RLRAG_HASH_HPP_

#include <string>
#include <string_view>

namespace rlrag {

// Lowercase hex SHA-256 of `data`.
std::string Sha256Hex(std::string_view data);

// Git blob object id ("blob <size>\0<data>", SHA-1) of `data`.
std::string GitBlobHash(std::string_view data);

}  // namespace rlrag

#endif  // RLRAG_HASH_HPP_
