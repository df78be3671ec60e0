#ifndef PAIRSHAP_CLI_HPP
#define PAIRSHAP_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace pairshap {

// Runs the command line `pairshap <args...>` (program name excluded) with
// data going to `out` and diagnostics to `err`. Returns the process exit
// code: 0 on success, 2 for input and guard errors, 3 for numerical failures.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pairshap

#endif  // PAIRSHAP_CLI_HPP
