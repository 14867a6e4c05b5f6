#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dsts::cli {

// Subcommands: build-outer, score, eval, personalize, distort.
// Exit codes: 0 success, 1 usage or fatal error, 2 batch finished with per-item failures.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

// Same as above with the program name omitted from `args`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dsts::cli
