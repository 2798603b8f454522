#pragma once

#include "featlab/cli/options.hpp"

namespace featlab::cli {

// Executes a parsed command. Returns 0 on success, 1 on numerical abort,
// 2 on configuration errors.
int run(const RunConfig& cfg);

}  // namespace featlab::cli
