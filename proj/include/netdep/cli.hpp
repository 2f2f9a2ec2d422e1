#pragma once

#include <string>
#include <vector>

namespace netdep {

/// Entry point behind the `netdep` binary; exposed for in-process testing.
/// args excludes the program name. Exit codes: 0 success, 2 invalid
/// configuration, 3 generation error, 4 statistic error, 5 partial benchmark
/// failure.
int run_cli(const std::vector<std::string>& args);

}  // namespace netdep
