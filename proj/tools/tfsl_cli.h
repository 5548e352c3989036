/**
 * Copyright 2026 The TFSL Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef TFSL_TOOLS_TFSL_CLI_H_
#define TFSL_TOOLS_TFSL_CLI_H_

#include <filesystem>
#include <ostream>

#include "tfsl/loop_service.h"

namespace tfsl::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitPipelineError = 1;
inline constexpr int kExitUsage = 2;

// Entry point shared by the binary and the tests. Human output goes to
// `out`; pipeline errors are written to `err` as
// {"error": {"code", "message"}}.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Latest run directory (lexicographic, names start with a UTC timestamp)
// under runs_dir that holds a run.json. Throws Error(kNotFound).
std::filesystem::path latest_run(const std::filesystem::path& runs_dir);

// Baseline model, evaluation-split inference and images of a run, ready for
// the loop service.
ServiceInputs load_service_inputs(const std::filesystem::path& run_dir);

}  // namespace tfsl::cli

#endif  // TFSL_TOOLS_TFSL_CLI_H_
