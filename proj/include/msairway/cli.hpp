#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace msairway {

enum ExitCode : int {
  kExitOk = 0,
  kExitUnexpected = 1,
  kExitInput = 2,
  kExitValidation = 3,
  kExitBackend = 4,
};

/// Entry point of the msairway command line; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace msairway
