#pragma once

namespace pat {

/// Entry point of the `pat` command line tool. Returns the process exit
/// code instead of exiting, so tests can drive it in-process.
int run_cli(int argc, const char* const* argv);

}  // namespace pat
