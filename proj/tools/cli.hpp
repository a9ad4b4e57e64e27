// Copyright 2026 The unsupseg Authors.
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

#ifndef UNSUPSEG_TOOLS_CLI_HPP_
#define UNSUPSEG_TOOLS_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace unsupseg::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kDataError = 2,
  kNumericError = 3,
};

// Runs `unsupseg <command> [options]`; args excludes the program name.
// Results go to `out`, diagnostics and the effective configuration to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace unsupseg::cli

#endif  // UNSUPSEG_TOOLS_CLI_HPP_
