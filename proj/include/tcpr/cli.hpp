#pragma once

namespace tcpr {

// Full command-line front end (argument parsing, validation, execution).
// Returns the process exit code: 0 on success, 1 for usage or validation
// errors, 2 for runtime failures (I/O, malformed data, numeric
// degeneracies). Lives in the library so tests can drive it in-process.
int run_cli(int argc, const char* const* argv);

}  // namespace tcpr
