// Copyright 2026 The Afford Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
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

namespace afford::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kViolations = 1;  // validate found problems
inline constexpr int kFailure = 2;     // usage, I/O or data error

/// Runs one subcommand. `args` excludes the program name. Errors are
/// reported as a JSON object on `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace afford::cli
