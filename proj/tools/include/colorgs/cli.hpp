#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace colorgs::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

/// Runs one `colorgs` invocation. `args` excludes the program name.
///
/// Returns 0 on success, 1 on bad arguments or unusable inputs, 2 when the
/// pipeline itself fails. Nonzero exits write one JSON error line to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Same as above with std::cout / std::cerr.
int dispatch(const std::vector<std::string>& args);

}  // namespace colorgs::cli
