#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace captionprobe {

inline constexpr const char *kVersion = "0.1.0";

// Runs one `captionprobe` invocation; `args` excludes the program name.
// Returns the process exit code: 0 success, 1 usage, 2 data/alignment, 3 I/O.
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace captionprobe
