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

#include <iosfwd>
#include <string>
#include <vector>

namespace dewarp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitDataError = 2;

// Runs the dewarp command line. args excludes the program name. Usage
// problems print a line starting with "usage:" to err and return 1; data
// errors print "error: ..." and return 2.
int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// "1/3", "0.3333", "2" -> double. Throws std::invalid_argument.
double ParseRatio(const std::string& text);

}  // namespace dewarp::cli
