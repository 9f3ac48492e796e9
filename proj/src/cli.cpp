#include "ecalp/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "ecalp/eca_daemon.hpp"
#include "ecalp/events.hpp"
#include "ecalp/parser.hpp"
#include "ecalp/ruleml.hpp"
#include "ecalp/updates.hpp"

namespace ecalp::cli {

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

int config_error(std::ostream& err, const std::string& what) {
    err << "error: " << what << '\n';
    return kConfigError;
}

const char* outcome_word(RuleOutcome::Kind kind) {
    switch (kind) {
        case RuleOutcome::Kind::Fired: return "fired";
        case RuleOutcome::Kind::ElseFired: return "else_fired";
        case RuleOutcome::Kind::TimeNotDue: return "time_not_due";
        case RuleOutcome::Kind::EventAbsent: return "event_absent";
        case RuleOutcome::Kind::Inert: return "inert";
        case RuleOutcome::Kind::Failed: return "failed";
    }
    return "?";
}

struct Injection {
    Term event;
    long long seconds = 0;
};

std::optional<Injection> parse_injection(const std::string& raw) {
    std::size_t at = raw.rfind('@');
    if (at == std::string::npos || at == 0 || at + 1 == raw.size()) return std::nullopt;
    auto event = parse_term_text(raw.substr(0, at));
    if (!event) return std::nullopt;
    const std::string digits = raw.substr(at + 1);
    std::size_t k = digits[0] == '-' ? 1 : 0;
    if (k == digits.size()) return std::nullopt;
    for (; k < digits.size(); ++k)
        if (!std::isdigit(static_cast<unsigned char>(digits[k]))) return std::nullopt;
    return Injection{*event, std::stoll(digits)};
}

/// Load the event-calculus prelude and then every script, in order, as one
/// module each. Nothing executes if any script fails to parse.
std::optional<KnowledgeState> load_scripts(const CliConfig& config, std::ostream& err,
                                           std::vector<std::vector<Term>>* directives) {
    KnowledgeState state = *load_module_text(KnowledgeState{}, kEventPreludeOid, kEventPrelude)
                                .state;
    for (const std::string& path : config.scripts) {
        ModuleLoad load = load_module_file(state, path);
        if (!load.ok()) {
            err << path << ": " << load.error->to_string() << '\n';
            return std::nullopt;
        }
        state = *load.state;
        if (directives)
            directives->insert(directives->end(), load.directives.begin(),
                               load.directives.end());
    }
    return state;
}

/// Load-time goals: prove the first answer and apply its intents. A goal
/// with no answers, a rolled-back transaction or a payload error aborts.
int run_directives(KnowledgeState& state, const std::vector<std::vector<Term>>& directives,
                   const BuiltinRegistry& reg, const DaemonOptions& opts, std::ostream& err) {
    for (const std::vector<Term>& goals : directives) {
        SolverOptions sopts;
        sopts.clock = opts.clock;
        sopts.timers = opts.timers;
        Solver solver(state, reg, sopts);
        std::optional<std::pair<Substitution, std::vector<Intent>>> answer;
        try {
            answer = solver.solve_first(goals);
        } catch (const SolverError& e) {
            err << "directive: " << e.what() << '\n';
            return kRuntimeError;
        }
        if (!answer) {
            err << "directive failed: " << format_term(goals.front()) << '\n';
            return kRuntimeError;
        }
        ApplyResult applied = apply_intents(state, answer->second, reg);
        for (const std::string& e : applied.errors) err << "directive: " << e << '\n';
        bool rolled_back = std::any_of(applied.transactions.begin(), applied.transactions.end(),
                                       [](const TxResult& tx) { return !tx.committed(); });
        if (!applied.errors.empty() || rolled_back) {
            for (const TxResult& tx : applied.transactions)
                for (const ConstraintViolation& v : tx.violations)
                    err << "directive integrity " << format_term(v.constraint) << ": "
                        << v.witness << '\n';
            return kRuntimeError;
        }
        for (const auto& [to, msg] : applied.messages)
            if (opts.sink) opts.sink(to, msg);
        state = applied.state;
    }
    return kOk;
}

DaemonOptions make_daemon_options(const CliConfig& config, std::ostream& out) {
    DaemonOptions opts;
    opts.parallel = config.parallel;
    if (config.sim_clock)
        opts.clock = std::make_shared<SimulatedClock>(
            TimePoint::from_seconds(config.sim_clock->first));
    else
        opts.clock = std::make_shared<SystemClock>();
    opts.timers = std::make_shared<TimerRegistry>();
    opts.sink = [&out](const Term& to, const Term& msg) {
        out << "NOTIFY " << format_term(to) << ' ' << format_term(msg) << '\n';
    };
    return opts;
}

int apply_injections(KnowledgeState& state, const CliConfig& config, const DaemonOptions& opts,
                     std::ostream& err) {
    for (const std::string& raw : config.injections) {
        auto inj = parse_injection(raw);
        if (!inj) return config_error(err, "bad injection '" + raw + "' (want term@seconds)");
        Term stamp = config.sim_clock
                         ? Term::time_point(
                               TimePoint::from_seconds(config.sim_clock->first + inj->seconds))
                         : Term::time_point(opts.clock->now());
        state = record_occurrence(state, inj->event, stamp);
    }
    return kOk;
}

void print_trace(const CycleReport& report, CliConfig::TraceLevel level, std::ostream& out) {
    if (level == CliConfig::TraceLevel::Off) return;
    for (const RuleOutcome& o : report.outcomes) {
        out << report.cycle_no << '\t' << o.rule_id << '\t'
            << (o.stage.empty() ? "-" : o.stage) << '\t' << outcome_word(o.kind);
        if (level == CliConfig::TraceLevel::Solver && !o.diagnostic.empty())
            out << '\t' << o.diagnostic;
        out << '\n';
    }
}

int cmd_run(const CliConfig& config, std::ostream& out, std::ostream& err) {
    std::vector<std::vector<Term>> directives;
    auto state = load_scripts(config, err, &directives);
    if (!state) return kConfigError;

    BuiltinRegistry reg = default_builtins();
    DaemonOptions opts = make_daemon_options(config, out);
    if (int rc = run_directives(*state, directives, reg, opts, err); rc != kOk) return rc;
    if (int rc = apply_injections(*state, config, opts, err); rc != kOk) return rc;

    bool any_failed = false;
    opts.on_cycle = [&](const CycleReport& report) {
        print_trace(report, config.trace_level, out);
        out << format_cycle_report(report);
        for (const RuleOutcome& o : report.outcomes)
            any_failed |= o.kind == RuleOutcome::Kind::Failed;
    };

    run_daemon(*state, reg, opts, std::chrono::milliseconds(config.tick_ms),
               config.max_cycles);
    return any_failed ? kRuntimeError : kOk;
}

int cmd_query(const CliConfig& config, std::ostream& out, std::ostream& err) {
    std::vector<std::vector<Term>> directives;
    auto state = load_scripts(config, err, &directives);
    if (!state) return kConfigError;

    QueryResult q = parse_query(*config.query);
    if (!q.ok()) return config_error(err, "query: " + q.error->to_string());

    BuiltinRegistry reg = default_builtins();
    DaemonOptions opts = make_daemon_options(config, out);
    if (int rc = run_directives(*state, directives, reg, opts, err); rc != kOk) return rc;

    SolverOptions sopts;
    sopts.clock = opts.clock;
    sopts.timers = opts.timers;
    Solver solver(*state, reg, sopts);
    std::size_t answers = 0;
    try {
        solver.solve(*q.literals, [&](const Substitution& s, const std::vector<Intent>&) {
            ++answers;
            if (q.named_vars.empty()) {
                out << "yes\n";
                return false;
            }
            for (std::size_t i = 0; i < q.named_vars.size(); ++i) {
                const auto& [name, id] = q.named_vars[i];
                if (i) out << ", ";
                out << name << " = " << format_term(s.apply(Term::variable(name, id)));
            }
            out << '\n';
            return true;
        });
    } catch (const SolverError& e) {
        err << "query: " << e.what() << '\n';
        return kRuntimeError;
    }
    if (answers == 0) out << "no\n";
    return kOk;
}

int cmd_translate(const CliConfig& config, std::ostream& out, std::ostream& err) {
    std::ifstream in(*config.xml_input, std::ios::binary);
    if (!in.good()) return config_error(err, "cannot read " + *config.xml_input);
    std::ostringstream buffer;
    buffer << in.rdbuf();

    RulemlParse parsed = parse_eca_ruleml(buffer.str());
    if (!parsed.ok()) {
        for (const std::string& e : parsed.errors) err << *config.xml_input << ": " << e << '\n';
        return kConfigError;
    }
    std::string error;
    auto translated = translate_to_ecalp(*parsed.root, &error);
    if (!translated) return config_error(err, *config.xml_input + ": " + error);
    for (const std::string& w : translated->warnings) err << "warning: " << w << '\n';

    if (config.output_path) {
        std::ofstream dst(*config.output_path, std::ios::binary);
        if (!dst.good()) return config_error(err, "cannot write " + *config.output_path);
        dst << translated->program;
    } else {
        out << translated->program;
    }
    return kOk;
}

int cmd_check(const CliConfig& config, std::ostream& out, std::ostream& err) {
    auto state = load_scripts(config, err, nullptr);
    if (!state) return kConfigError;

    BuiltinRegistry reg = default_builtins();
    std::vector<ConstraintViolation> violations = test_integrity(*state, reg);
    if (violations.empty()) {
        out << "ok\n";
        return kOk;
    }
    for (const ConstraintViolation& v : violations)
        out << "integrity " << format_term(v.constraint) << ": " << v.witness << '\n';
    return kRuntimeError;
}

std::optional<CliConfig::TraceLevel> trace_level_of(const std::string& text) {
    if (text == "off") return CliConfig::TraceLevel::Off;
    if (text == "rules") return CliConfig::TraceLevel::Rules;
    if (text == "solver") return CliConfig::TraceLevel::Solver;
    return std::nullopt;
}

}   // namespace

int run(const CliConfig& config, std::ostream& out, std::ostream& err) {
    if (config.tick_ms < 1) return config_error(err, "tick must be at least 1 ms");
    if (config.sim_clock && config.parallel)
        return config_error(err, "a simulated clock requires deterministic mode");
    if (config.command != CliConfig::Command::Translate && config.scripts.empty())
        return config_error(err, "no scripts given");

    switch (config.command) {
        case CliConfig::Command::Run: return cmd_run(config, out, err);
        case CliConfig::Command::Query: return cmd_query(config, out, err);
        case CliConfig::Command::Translate: return cmd_translate(config, out, err);
        case CliConfig::Command::Check: return cmd_check(config, out, err);
    }
    return kConfigError;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CliConfig config;
    std::string clock_text = "real";
    std::string trace_text = "off";
    std::uint64_t max_cycles = 0;
    std::vector<std::string> query_args;

    CLI::App app{"ECA-LP: logic programs with reactive rules"};
    app.require_subcommand(1);

    CLI::App* run_cmd = app.add_subcommand("run", "Load scripts and run the polling daemon");
    run_cmd->add_option("scripts", config.scripts, "ECA-LP scripts, loaded in order")
        ->required()
        ->expected(-1);
    bool deterministic = false;
    run_cmd->add_flag("--deterministic", deterministic, "evaluate rules sequentially (default)");
    CLI::Option* parallel_opt =
        run_cmd->add_flag("--parallel", config.parallel, "evaluate rules concurrently");
    parallel_opt->excludes("--deterministic");
    CLI::Option* tick_opt =
        run_cmd->add_option("--tick", config.tick_ms, "polling period in ms");
    run_cmd->add_option("--max-cycles", max_cycles, "stop after this many cycles");
    run_cmd->add_option("--clock", clock_text, "real or sim:<start-seconds>:<step-ms>");
    run_cmd->add_option("--inject", config.injections,
                        "record an occurrence, syntax term@seconds");
    run_cmd->add_option("--trace", trace_text, "off, rules or solver");

    CLI::App* query_cmd = app.add_subcommand("query", "Load scripts and answer one goal");
    query_cmd->add_option("args", query_args, "scripts followed by the goal")
        ->required()
        ->expected(-1);

    CLI::App* translate_cmd =
        app.add_subcommand("translate", "Translate an ECA-RuleML document to ECA-LP");
    std::string xml_input;
    std::string output_path;
    translate_cmd->add_option("document", xml_input, "XML input file")->required();
    CLI::Option* out_opt =
        translate_cmd->add_option("-o,--output", output_path, "write here instead of stdout");

    CLI::App* check_cmd =
        app.add_subcommand("check", "Parse scripts and test integrity, changing nothing");
    std::vector<std::string> check_scripts;
    check_cmd->add_option("scripts", check_scripts, "ECA-LP scripts")->required()->expected(-1);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        return config_error(err, e.what());
    }

    if (run_cmd->parsed()) {
        config.command = CliConfig::Command::Run;
        if (run_cmd->count("--max-cycles")) config.max_cycles = max_cycles;
        if (clock_text != "real") {
            std::string rest =
                clock_text.rfind("sim:", 0) == 0 ? clock_text.substr(4) : std::string{};
            std::size_t colon = rest.find(':');
            std::size_t used_start = 0, used_step = 0;
            long long start = 0, step = 0;
            try {
                start = std::stoll(rest.substr(0, colon), &used_start);
                step = std::stoll(rest.substr(colon + 1), &used_step);
            } catch (...) {
                return config_error(err, "bad clock '" + clock_text + "'");
            }
            if (colon == std::string::npos || used_start != colon ||
                used_step != rest.size() - colon - 1 || step < 1)
                return config_error(err, "bad clock '" + clock_text + "'");
            config.sim_clock = {start, static_cast<int>(step)};
            if (tick_opt->count() && config.tick_ms != step)
                return config_error(err, "tick and simulated clock step disagree");
            config.tick_ms = static_cast<int>(step);
        }
    } else if (query_cmd->parsed()) {
        config.command = CliConfig::Command::Query;
        if (query_args.size() < 2)
            return config_error(err, "query needs at least one script and a goal");
        config.query = query_args.back();
        config.scripts.assign(query_args.begin(), query_args.end() - 1);
    } else if (translate_cmd->parsed()) {
        config.command = CliConfig::Command::Translate;
        config.xml_input = xml_input;
        if (out_opt->count()) config.output_path = output_path;
    } else if (check_cmd->parsed()) {
        config.command = CliConfig::Command::Check;
        config.scripts = check_scripts;
    }

    if (const char* env = std::getenv("ECALP_TRACE"); env && *env) trace_text = env;
    auto level = trace_level_of(trace_text);
    if (!level) return config_error(err, "bad trace level '" + trace_text + "'");
    config.trace_level = *level;

    return run(config, out, err);
}

}   // namespace ecalp::cli
