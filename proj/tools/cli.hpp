#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace biharm::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kRegime = 3,
  kConvergence = 4,
  kVerification = 5,
};

// Runs one invocation; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// "2.5", "1e-3" or a fraction "17/9". Throws std::invalid_argument.
double parse_number(const std::string& text);
// "13", "5..16" or "5,7,9".
std::vector<int> parse_int_range(const std::string& text);
// Comma-separated numbers, each as in parse_number.
std::vector<double> parse_number_list(const std::string& text);
// key = value lines; '#' starts a comment. Throws std::invalid_argument on
// malformed lines.
std::map<std::string, std::string> parse_config(std::istream& in);

}  // namespace biharm::cli
