/*
 * Copyright 2026 The jacfield Authors. All rights reserved.
 * This file is licensed to you under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License. You may obtain a copy
 * of the License at http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software distributed under
 * the License is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR REPRESENTATIONS
 * OF ANY KIND, either express or implied. See the License for the specific language
 * governing permissions and limitations under the License.
 */

#pragma once

#include <iosfwd>

namespace jacfield::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Exit codes shared by every subcommand.
enum ExitCode : int {
    kConverged = 0,
    kError = 1,
    kBudgetExhausted = 2,
    kValidationFailed = 3,
};

/// Entry point behind the `jacfield` executable; `out`/`err` stand in for stdout/stderr.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace jacfield::cli
