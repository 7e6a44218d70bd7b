#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mtlaqa::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

/// Parses and dispatches one invocation. Reports go to `out`, diagnostics
/// and progress to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mtlaqa::cli
