#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace evoter::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitRuntime = 3;

inline constexpr int kSchemaVersion = 1;

// Runs one subcommand; args excludes the program name. Messages go to err,
// results that are not written to files go to out.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace evoter::cli
