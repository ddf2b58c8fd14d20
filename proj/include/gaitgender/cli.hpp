#pragma once

#include <iosfwd>

namespace gaitgender {

/// Environment variable naming the default model file.
inline constexpr const char* kModelEnvVar = "GAITGENDER_MODEL";

/// Entry point of the `gaitgender` tool. Machine-readable results go to
/// `out` as JSON lines; on failure a single {"error": ..., "message": ...}
/// line goes to `err` and the return value is nonzero.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gaitgender
