#pragma once

#include <string>
#include <vector>

namespace ouest {

struct CliInvocation {
    std::string subcommand;
    std::string config_path;              // optional for `oracle`
    std::vector<std::string> overrides;   // dotted.key=value, applied in order
    std::string outdir;                   // empty: $OUEST_OUT_DIR or "."
    int verbosity = 0;
};

// Runs the named pipeline and writes its artifacts with deterministic
// filenames {subcommand}-{seed}.{csv|json} under the output directory.
// Returns 0 on success, 1 on configuration/validation errors, 2 when named
// checks fail (mc, oracle).
int dispatch(const CliInvocation& inv);

}  // namespace ouest
