#ifndef NLWAVE_SCENARIO_HPP
#define NLWAVE_SCENARIO_HPP

#include "nlwave/types.hpp"

#include <map>
#include <string>

namespace nlwave {

///
/// Flat scenario file: `[section]` headers over `key = value` lines,
/// comments with '#'. Keys are addressed as "section.key".
///
struct Scenario {
    std::map<std::string, std::string> kv;

    static Scenario parse_file(const std::string& path);
    static Scenario parse_text(const std::string& text, const std::string& origin = "<memory>");

    bool has(const std::string& key) const { return kv.count(key) > 0; }
    std::string str(const std::string& key, const std::string& fallback) const;
    double num(const std::string& key, double fallback) const;
    int integer(const std::string& key, int fallback) const;

    /// throws validation_error when ranges or cross-field invariants fail
    void validate() const;
};

struct RunOptions {
    std::string experiment;  // subcommand verb; must match scenario when both given
    std::string out_dir;     // overrides output.dir when nonempty
    unsigned long long seed = 1;
    int threads = 0;         // 0: leave the OpenMP default
};

/// Executes the scenario's experiment; writes CSV outputs and manifest.txt
/// into the output directory. Returns the process exit status (0 on
/// success; verify returns nonzero when a check fails).
int run_scenario(const Scenario& sc, const RunOptions& opt);

/// Exit codes for the CLI error classes.
enum ExitCode {
    exit_ok = 0,
    exit_generic = 1,
    exit_parse = 2,
    exit_validation = 3,
    exit_numerical = 4,
    exit_contract = 5,
};

} // namespace nlwave

#endif
