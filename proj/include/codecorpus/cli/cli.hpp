// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace codecorpus::cli {

enum ExitCode : int { kOk = 0, kUsageError = 1, kDataError = 2, kBackendError = 3 };

/// Entry point of the `codecorpus` executable. Subcommands: profile,
/// stratify, transform, pack, eval, report. Each writes its products and a
/// manifest.json into --output. Never throws; returns an ExitCode.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);  // args[0] is the program name

}  // namespace codecorpus::cli
