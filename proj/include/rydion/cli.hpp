#pragma once

namespace rydion::cli {

/// Entry point behind the rydion binary. Returns the process exit code:
/// 0 success, 2 invalid configuration/usage, 3 numerical failure.
int run(int argc, const char* const* argv);

} // namespace rydion::cli
