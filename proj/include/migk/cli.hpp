// Copyright 2026 The migk Authors. All Rights Reserved.
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

#ifndef MIGK_CLI_HPP_
#define MIGK_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace migk {

// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;  // usage or validation error
inline constexpr int kExitFailed = 2;   // runtime failure

// Runs one subcommand (gram, train, predict, cv, loo, compare, convert,
// validate). `args` excludes the program name. A "--config FILE" of
// key=value lines supplies defaults for the subcommand's long flags;
// flags given on the command line take precedence.
int cli_run(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace migk

#endif  // MIGK_CLI_HPP_
