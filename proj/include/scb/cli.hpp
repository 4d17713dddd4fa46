// Command-line front end shared by the scbsim tool and its tests.
#pragma once

#include <iosfwd>

namespace scb {

// Exit codes of run_command.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 1,
    kExitConvergence = 2,
    kExitContract = 3,
    kExitAcceptance = 4,
};

// Dispatches analyze / simulate / sweep / regulate / contract-check / verify.
int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace scb
