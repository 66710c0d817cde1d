#pragma once

#include <iostream>

namespace vidtl {

/// Dispatch a command line: machine-readable JSON on `out`, human diagnostics
/// on `err`. Returns 0 on success, 1 on domain errors, 2 on usage errors.
int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
            std::ostream& err = std::cerr);

}  // namespace vidtl
