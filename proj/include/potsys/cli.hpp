#pragma once

// Command-line driver.

#include <iosfwd>
#include <string>
#include <vector>

namespace potsys::cli {

enum ExitCode : int
{
    exit_true = 0,
    exit_false = 1,
    exit_usage = 2,
    exit_input = 3,
};

/// `args` excludes the program name. Caps may also come from
/// POTSYS_MAX_SIZE, POTSYS_MAX_ALPHA and POTSYS_UNRAVEL_DEPTH; flags win.
auto run(std::vector<std::string> args, std::istream & in, std::ostream & out, std::ostream & err) -> int;

} // namespace potsys::cli
