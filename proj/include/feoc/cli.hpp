#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace feoc {

/// Entry point of the `feoc` tool. Returns 0 on success, 2 when the
/// configuration or flags are invalid, 1 on runtime failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Thread count from FEOC_THREADS, or 0 when unset.
int threads_from_env();

}  // namespace feoc
