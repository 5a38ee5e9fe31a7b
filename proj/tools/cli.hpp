#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace frontier::cli {

inline constexpr int kSchemaVersion = 1;

/// Runs `frontier_ppm <command> [--key value ...]`. Records go to the file named
/// by `out` (written atomically) or to `stdout` when no output path is given.
/// Returns 0 on success, 1 on usage or validation errors, 2 on solver failures.
int run_command(const std::vector<std::string>& args, std::ostream& stdout_stream, std::ostream& stderr_stream);

}  // namespace frontier::cli
