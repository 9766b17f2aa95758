#pragma once

#include <iosfwd>

namespace topouq {

// Runs `topo-uq` with the given argv. Exit codes: 0 ok, 1 usage error,
// 2 data error, 3 provider error. Errors go to `err` (as one JSON object
// when --json is given).
int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace topouq
