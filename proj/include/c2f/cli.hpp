#pragma once

namespace c2f {

// Entry point behind the c2fgrasp binary. Returns 0 on success, 1 on bad
// input (arguments or files), 2 on an internal invariant failure.
int run_cli(int argc, const char* const* argv);

}  // namespace c2f
