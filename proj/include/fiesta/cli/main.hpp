#pragma once

#include <iosfwd>

namespace fiesta::cli {

// The `fiesta` command.  Returns the process exit code.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fiesta::cli
