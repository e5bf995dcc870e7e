#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace doclayout {

// Entry point of the `doclayout` tool. Returns 0 on success, 2 on usage
// errors (unknown subcommand or flag, missing required flag) and 1 on any
// other failure.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Convenience overload; args excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace doclayout
