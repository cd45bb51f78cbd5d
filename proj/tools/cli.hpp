// Copyright (c) 2026, The warmstart Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace warmstart::cli {

/// Runs one `warmstart` invocation. `args` excludes the program name.
/// Returns 0 on success, 2 for usage or configuration errors, 1 otherwise.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses `key = value` lines; `#` starts a comment. Throws Error(Config).
std::vector<std::pair<std::string, std::string>> parse_config(const std::string& text);

}  // namespace warmstart::cli
