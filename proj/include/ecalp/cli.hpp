#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ecalp::cli {

/// Everything the command line can say, resolved to one plan.
struct CliConfig {
    enum class Command { Run, Query, Translate, Check };
    enum class TraceLevel { Off, Rules, Solver };

    Command command = Command::Run;
    std::vector<std::string> scripts;   // loaded in order; path doubles as module oid
    bool parallel = false;              // default is the deterministic mode
    int tick_ms = 1000;
    std::optional<std::uint64_t> max_cycles;

    /// (start seconds, step ms); nullopt runs on the system clock.
    std::optional<std::pair<long long, int>> sim_clock;

    TraceLevel trace_level = TraceLevel::Off;
    std::vector<std::string> injections;   // raw "term@seconds" occurrences
    std::optional<std::string> query;      // goal text for the query command
    std::optional<std::string> xml_input;     // translate: source document
    std::optional<std::string> output_path;   // translate: -o target, stdout when absent
};

/// Execute a resolved configuration. Reports and NOTIFY lines stream to out,
/// diagnostics to err. Returns 0 on a clean run, 1 on parse or configuration
/// errors, 2 on runtime failures (failed rules, integrity violations,
/// solver errors).
int run(const CliConfig& config, std::ostream& out, std::ostream& err);

/// Parse argv-style arguments (program name excluded) and execute them.
/// The ECALP_TRACE environment variable overrides the trace level.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}   // namespace ecalp::cli
