// Copyright 2026 The keycov Authors.
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

#ifndef KEYCOV_TOOLS_CLI_H_
#define KEYCOV_TOOLS_CLI_H_

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "keycov/backend.h"
#include "keycov/embedding.h"
#include "keycov/inventory.h"
#include "settings.h"

namespace keycov {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;  // usage, validation, config, conflicts
inline constexpr int kExitIo = 2;

// Runs the keycov command line. args excludes the program name.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::unique_ptr<LogitBackend> MakeBackend(const Settings& settings, const KeyInventory& inv);
std::unique_ptr<EmbeddingProvider> MakeEmbeddingProvider(const Settings& settings);

}  // namespace keycov

#endif  // KEYCOV_TOOLS_CLI_H_
