#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace resguide::cli {

/// Runs the command line (without the program name). Returns the process exit
/// status; diagnostics go to `err` as a single "error: ..." line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses flat "key = value" lines; '#' starts a comment.
std::vector<std::pair<std::string, std::string>> parse_config(const std::string& text);

}  // namespace resguide::cli
