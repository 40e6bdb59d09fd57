// Copyright (c) 2026 The dewarp Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dewarp {

std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path);

// Writes to "<path>.tmp.<pid>" and renames over path, so readers never see a
// partially written file. Parent directories are created as needed.
void WriteFileAtomic(const std::filesystem::path& path,
                     std::span<const std::uint8_t> bytes);
void WriteFileAtomic(const std::filesystem::path& path, std::string_view text);

// Maps an utterance id to a single path component.
std::string SafeFileStem(std::string_view id);

}  // namespace dewarp
