#pragma once

namespace hessems::cli {

/// Entry point shared by the binary and the test suite. Returns the
/// process exit status: 0 on success, nonzero with a diagnostic on the
/// error stream otherwise.
int run_command(int argc, const char* const* argv);

}  // namespace hessems::cli
