#ifndef DSM_CLI_HPP
#define DSM_CLI_HPP

#include <string>
#include <vector>

namespace dsm::cli {

enum ExitCode : int {
  kSuccess = 0,
  kValidationError = 2,
  kNumericalError = 3,
  kIoError = 4,
};

/// Runs one subcommand; args[0] is the program name. Never throws.
int run(const std::vector<std::string>& args);

/// Parses `a:b:step` or `a,b,c` into a strictly increasing list.
std::vector<std::size_t> parse_n_grid(const std::string& text);

}  // namespace dsm::cli

#endif  // DSM_CLI_HPP
