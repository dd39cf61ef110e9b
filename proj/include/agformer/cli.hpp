#pragma once

#include <ostream>

namespace agf::cli {

// Entry point behind the `agformer` binary. Exit codes: 0 success,
// 2 configuration/usage/input errors, 3 numeric failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace agf::cli
