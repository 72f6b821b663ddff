#pragma once

#include <iostream>

namespace audvault {

// Exit codes: 0 success, 1 user error (bad arguments, not found, validation,
// conflict), 2 internal error.
int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr);

}  // namespace audvault
