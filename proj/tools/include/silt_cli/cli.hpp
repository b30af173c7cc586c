#pragma once

// Entry point of the `silt` command line tool, callable in-process.

#include <iosfwd>
#include <string>
#include <vector>

namespace silt::cli {

// args excludes the program name. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace silt::cli
