// Copyright 2026 The Cadence Authors
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

#ifndef CADENCE_CLI_HPP_
#define CADENCE_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace cadence::cli {

// Runs one command: args excludes the program name, e.g.
// {"synth", "--subjects", "8", "--out-dir", "d"}. Log lines go to `out`;
// failures produce exactly one "error: <kind>: <message>" line on `err`.
// Returns the process exit code: 0 ok, 2 usage, 3 data, 4 numeric.
int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace cadence::cli

#endif  // CADENCE_CLI_HPP_
