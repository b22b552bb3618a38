// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>

namespace ncnet::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kInputError = 2,
  kSizeGuard = 3,
  kInfeasible = 4,
};

// Entry point behind the `ncnet` binary; writes to `out`/`err` instead of the
// process streams so tests can drive it in-process.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace ncnet::cli
