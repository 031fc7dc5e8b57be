// Copyright 2026 The tubepolicy Authors
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

#ifndef TDP_CLI_COMMANDS_H_
#define TDP_CLI_COMMANDS_H_

#include <stdexcept>
#include <string>
#include <vector>

namespace tdp {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitVerificationFailed = 2,
  kExitRuntimeFault = 3,
};

class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

class VerificationFailure : public std::runtime_error {
 public:
  explicit VerificationFailure(const std::string& what) : std::runtime_error(what) {}
};

// subcommands: demo-gen, train, eval, ablate-ddim, verify-stability, serve,
// rerun; |args| excludes the program name; returns an ExitCode
int RunCli(const std::vector<std::string>& args);

// manifest argument normalization: "--k=v" split, input paths made
// absolute, --seed pinned to |seed|
std::vector<std::string> CanonicalArgs(const std::vector<std::string>& args,
                                       unsigned long long seed);

}  // namespace tdp

#endif  // TDP_CLI_COMMANDS_H_
