#pragma once

#include <ostream>

namespace amortlab {

// Exit codes: 0 all PASS, 1 any FAIL or stuck run, 2 usage or input error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace amortlab
