#ifndef MSGLON_CLI_HPP
#define MSGLON_CLI_HPP

// Command-line front end: generate, lon, validate-boa, ns, bench, analyze.

#include <iosfwd>
#include <string>
#include <vector>

namespace msglon::cli {

enum ExitCode : int {
    ok = 0,
    failure = 1,
    usage_error = 2,
    io_error = 3,
    validation_error = 4,
};

/// Parses and runs one subcommand. `args` excludes the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, char** argv);

} // namespace msglon::cli

#endif
