#pragma once

#include "qaction/config.hpp"

namespace qaction {

// Runs one mode end to end and writes its artifacts under cfg.output_dir.
// Returns a process exit status instead of throwing:
//   0 success, 2 config/usage, 3 domain, 4 numeric, 5 io.
// Diagnostics go to stderr; the resolved config is echoed to stdout.
int run(const RunConfig& cfg);

}  // namespace qaction
