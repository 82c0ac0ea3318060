// Copyright 2026 The tokenshot Authors
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

#ifndef TOKENSHOT_TOOLS_CLI_HPP_
#define TOKENSHOT_TOOLS_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

#include "tokenshot/gradient_check.hpp"

namespace tokenshot::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitNumerical = 3,
};

/// Test seams. Production runs use the defaults.
struct Hooks {
  GradientFn gradient = AnalyticGradient();
};

/// Runs the tool on `args` (without the program name), writing the human
/// summary to `out` and diagnostics to `err`. Returns the exit code.
int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const Hooks& hooks = {});

}  // namespace tokenshot::cli

#endif  // TOKENSHOT_TOOLS_CLI_HPP_
