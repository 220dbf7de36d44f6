#pragma once

#include <iostream>

namespace polya {

/// Entry point behind the `polya` binary; split out so tests can drive the
/// full argument surface. Exit codes: 0 success, 1 usage/input error,
/// 2 numerical failure.
int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout,
             std::ostream& err = std::cerr);

}  // namespace polya
