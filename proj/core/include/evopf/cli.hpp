#pragma once

namespace evopf {

// Entry point shared by the command line binary and the tests.
// Returns a process exit code; never throws.
int cli_main(int argc, const char* const* argv);

} // namespace evopf
