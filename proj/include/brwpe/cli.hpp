#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "brwpe/config.hpp"

namespace brwpe {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitResource = 3,
  kExitVerification = 4,
};

/// Runs the command line `args` (args[0] is the program name). Records go to `out`
/// unless --out / out= names a file; error records go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Subcommand bodies; each writes line-delimited JSON records and returns an exit code.
int cmd_gen_env(const RunConfig& cfg, std::ostream& os);
int cmd_lilypad(const RunConfig& cfg, std::ostream& os);
int cmd_simulate(const RunConfig& cfg, std::ostream& os);
int cmd_pam(const RunConfig& cfg, std::ostream& os);
int cmd_verify(const RunConfig& cfg, std::ostream& os);
int cmd_localize(const RunConfig& cfg, std::ostream& os);

}  // namespace brwpe
