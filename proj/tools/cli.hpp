#pragma once

namespace ferkit::cli {

// Full command-line entry point, callable in-process by tests.
// Exit codes: 0 ok, 1 fatal error, 2 usage error.
int run(int argc, const char* const* argv);

}  // namespace ferkit::cli
