#include "rpoa/cli/app.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "rpoa/cli/results_io.hpp"
#include "rpoa/cli/scenario_io.hpp"
#include "rpoa/fees.hpp"
#include "rpoa/simnet/simnet.hpp"

#ifndef RPOA_VERSION
#define RPOA_VERSION "0.0.0"
#endif

namespace rpoa::cli {

namespace {

namespace fs = std::filesystem;
using simnet::ExperimentKind;
using simnet::Scenario;
using simnet::ScenarioError;

struct CommonOptions {
    std::string scenario_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::string format = "csv";
    bool quiet = false;
};

void add_common(CLI::App* sub, CommonOptions& opts, const std::string& default_out)
{
    opts.out_dir = default_out;
    sub->add_option("--scenario", opts.scenario_path, "Scenario file (JSON, comments allowed)");
    sub->add_option("--seed", opts.seed, "RNG seed; overrides the scenario's");
    sub->add_option("--out", opts.out_dir, "Output directory")->capture_default_str();
    sub->add_option("--format", opts.format, "Table format")->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    sub->add_flag("--quiet", opts.quiet, "Only errors on stderr, nothing on stdout");
}

std::string utc_now()
{
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::shared_ptr<spdlog::logger> make_logger(bool quiet)
{
    auto logger = spdlog::get("rpoa");
    if (!logger)
        logger = spdlog::stderr_logger_st("rpoa");
    logger->set_pattern("rpoa: %l: %v");
    auto level = spdlog::level::warn;
    if (const char* env = std::getenv("RPOA_LOG"))
        level = spdlog::level::from_str(env);
    if (quiet)
        level = std::max(level, spdlog::level::err);
    logger->set_level(level);
    return logger;
}

/// Knob overrides a subcommand may apply after loading the scenario.
struct Overrides {
    // attack
    std::optional<double> share;
    std::optional<std::uint64_t> depth;
    std::optional<std::uint64_t> budget;
    std::optional<std::uint64_t> runs;
    // sybil
    std::optional<std::uint64_t> sybils;
    // theorem1
    std::string grid;
    std::optional<std::uint64_t> samples;
    // retarget
    std::vector<std::uint32_t> windows;
    // all
    std::optional<std::uint64_t> blocks;
};

std::vector<simnet::Theorem1Cell> parse_grid(const std::string& text)
{
    if (text == "default")
        return simnet::default_theorem1_grid();
    std::vector<simnet::Theorem1Cell> grid;
    std::stringstream cells(text);
    std::string cell;
    while (std::getline(cells, cell, ';')) {
        simnet::Theorem1Cell c;
        char sep1 = 0, sep2 = 0, sep3 = 0;
        std::istringstream in(cell);
        if (!(in >> c.n_u >> sep1 >> c.n_b >> sep2 >> c.n_m >> sep3 >> c.gamma) || sep1 != ':' || sep2 != ':' ||
            sep3 != ':' || !(in >> std::ws).eof())
            throw ScenarioError("experiment.grid", "expected 'default' or cells 'n_u:n_b:n_m:gamma' separated by ';'");
        grid.push_back(c);
    }
    return grid;
}

Scenario load_scenario(ExperimentKind kind, const CommonOptions& opts, const Overrides& ov)
{
    Scenario s;
    if (!opts.scenario_path.empty()) {
        s = parse_scenario_file(opts.scenario_path, opts.seed);
        if (s.kind != kind) {
            throw ScenarioError("experiment.kind", std::string("scenario is for '") + simnet::to_string(s.kind) +
                                                       "' but the subcommand runs '" + simnet::to_string(kind) + "'");
        }
    } else {
        s.kind = kind;
        s.seed = opts.seed.value_or(kDefaultSeed);
        if (kind == ExperimentKind::retarget)
            s.hash_rate_step = simnet::HashRateStep{500, 4.0};
    }
    if (ov.blocks)
        s.duration_blocks = *ov.blocks;
    if (ov.share)
        s.attack.adversary_share = *ov.share;
    if (ov.depth)
        s.attack.depth = *ov.depth;
    if (ov.budget)
        s.attack.budget = *ov.budget;
    if (ov.runs) {
        s.attack.runs = *ov.runs;
        s.retarget.runs = *ov.runs;
    }
    if (ov.sybils)
        s.sybil.sybil_count = *ov.sybils;
    if (!ov.grid.empty())
        s.theorem1.grid = parse_grid(ov.grid);
    if (ov.samples)
        s.theorem1.samples = *ov.samples;
    if (!ov.windows.empty())
        s.retarget.windows = ov.windows;
    s.validate();
    return s;
}

void print_status(std::ostream& out, const simnet::SimResult& r, const std::string& dir)
{
    out << simnet::to_string(r.kind) << ": ";
    if (r.attack) {
        out << "success rate " << format_number(r.attack->success_rate) << " over " << r.attack->runs.size()
            << " runs (reference " << format_number(r.attack->reference_probability) << ")";
    } else if (r.sybil) {
        out << "single won " << r.sybil->single.blocks_won << ", cluster won " << r.sybil->cluster.blocks_won
            << ", entrance fee ratio " << format_number(r.sybil->entrance_fee_ratio);
    } else if (r.theorem1) {
        const auto& fit = r.theorem1->series.front().fit;
        out << "slope " << format_number(fit.slope) << ", r2 " << format_number(fit.r2) << ", max slope deviation "
            << format_number(r.theorem1->max_slope_deviation);
    } else if (r.retarget) {
        for (const auto& w : r.retarget->windows) {
            out << "W=" << w.window << " steady " << format_number(w.steady_mean_interval_s) << " s, settled "
                << (w.settled ? "yes" : "no") << ", reconverged " << (w.reconverged ? "yes" : "no") << "; ";
        }
    } else {
        out << r.metrics.chain_length << " blocks, mean interval " << format_number(r.metrics.mean_interblock_s)
            << " s";
    }
    out << " -> " << dir << "\n";
}

int run_experiment_command(const std::string& command, ExperimentKind kind, const CommonOptions& opts,
                           const Overrides& ov, std::ostream& out, spdlog::logger& log)
{
    Scenario scenario;
    try {
        scenario = load_scenario(kind, opts, ov);
    } catch (const ScenarioSyntaxError& e) {
        log.error("scenario syntax error: {}", e.what());
        return kExitScenario;
    } catch (const ScenarioError& e) {
        log.error("scenario error: {}", e.what());
        return kExitScenario;
    }

    const auto format = opts.format == "json" ? OutputFormat::json : OutputFormat::csv;
    try {
        RunManifest manifest;
        manifest.command = command;
        manifest.scenario_path = opts.scenario_path;
        manifest.seed = scenario.seed;
        manifest.tool_version = RPOA_VERSION;
        manifest.started_at = utc_now();
        manifest.output_dir = opts.out_dir;
        manifest.files = result_files(kind, format);
        manifest.files.emplace_back("manifest.json");

        const fs::path dir(opts.out_dir);
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec)
            throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
        write_text_file(dir / "manifest.json", manifest_json(manifest));

        log.info("running {} (seed {})", simnet::to_string(kind), scenario.seed);
        const auto result = simnet::run_experiment(scenario);
        for (const auto& w : result.warnings)
            log.warn("{}", w);
        emit_results(result, dir, format);

        manifest.finished_at = utc_now();
        write_text_file(dir / "manifest.json", manifest_json(manifest));
        if (!opts.quiet)
            print_status(out, result, opts.out_dir);
    } catch (const std::exception& e) {
        log.error("{}", e.what());
        return kExitRuntime;
    }
    return kExitOk;
}

struct FeeTableOptions {
    std::vector<std::int64_t> heights;
    std::vector<double> worths;
    std::vector<double> psis;
    std::optional<double> gamma_e;
    std::optional<double> alpha_fee;
    std::optional<double> omega_w;
    std::optional<double> gamma_u;
};

int run_fees_table(const CommonOptions& opts, const FeeTableOptions& fo, bool out_given, std::ostream& out,
                   spdlog::logger& log)
{
    fees::FeeSchedule sched;
    try {
        if (!opts.scenario_path.empty())
            sched = parse_scenario_file(opts.scenario_path, opts.seed.value_or(kDefaultSeed)).fees;
        if (fo.gamma_e)
            sched.entrance_base_gamma_e = *fo.gamma_e;
        if (fo.alpha_fee)
            sched.service_base_alpha_fee = *fo.alpha_fee;
        if (fo.omega_w)
            sched.max_block_worth_omega_w = *fo.omega_w;
        if (fo.gamma_u)
            sched.upload_base_gamma_u = *fo.gamma_u;
        sched.validate();
    } catch (const ScenarioSyntaxError& e) {
        log.error("scenario syntax error: {}", e.what());
        return kExitScenario;
    } catch (const std::exception& e) {
        log.error("fee schedule error: {}", e.what());
        return kExitScenario;
    }

    const bool explicit_tables = !fo.heights.empty() || !fo.worths.empty() || !fo.psis.empty();
    std::vector<std::int64_t> heights = fo.heights;
    std::vector<double> worths = fo.worths;
    std::vector<double> psis = fo.psis;
    if (!explicit_tables) {
        heights = {0, 1, 4, 100, 10000};
        worths = {0.0, 0.25 * sched.max_block_worth_omega_w, sched.max_block_worth_omega_w};
        psis = {1.0, 2.0, 4.0};
    } else if (worths.empty() != psis.empty()) {
        if (worths.empty())
            worths = {sched.max_block_worth_omega_w};
        else
            psis = {1.0};
    }

    const auto format = opts.format == "json" ? OutputFormat::json : OutputFormat::csv;
    std::vector<std::pair<std::string, Table>> tables;
    try {
        if (!heights.empty()) {
            Table t;
            t.columns = {"height", "entrance_fee"};
            for (auto h : heights)
                t.rows.push_back({h, fees::entrance_fee(h, sched)});
            tables.emplace_back("entrance_fees", std::move(t));
        }
        if (!worths.empty()) {
            Table t;
            t.columns = {"worth", "psi", "base_service_fee", "upload_fee"};
            for (double w : worths) {
                for (double psi : psis)
                    t.rows.push_back({w, psi, fees::base_service_fee(w, sched), fees::upload_fee(w, psi, sched)});
            }
            tables.emplace_back("upload_fees", std::move(t));
        }
    } catch (const std::invalid_argument& e) {
        log.error("{}", e.what());
        return kExitScenario;
    }

    try {
        const std::string ext = format == OutputFormat::csv ? ".csv" : ".json";
        auto render = [&](const Table& t) {
            return format == OutputFormat::csv ? t.to_csv() : t.to_json().dump(2) + "\n";
        };
        if (out_given) {
            const fs::path dir(opts.out_dir);
            std::error_code ec;
            fs::create_directories(dir, ec);
            if (ec)
                throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
            RunManifest manifest;
            manifest.command = "fees-table";
            manifest.scenario_path = opts.scenario_path;
            manifest.seed = opts.seed.value_or(kDefaultSeed);
            manifest.tool_version = RPOA_VERSION;
            manifest.started_at = utc_now();
            manifest.output_dir = opts.out_dir;
            for (const auto& [name, t] : tables)
                manifest.files.push_back(name + ext);
            manifest.files.emplace_back("manifest.json");
            write_text_file(dir / "manifest.json", manifest_json(manifest));
            for (const auto& [name, t] : tables)
                write_text_file(dir / (name + ext), render(t));
            manifest.finished_at = utc_now();
            write_text_file(dir / "manifest.json", manifest_json(manifest));
        }
        if (!out_given || !opts.quiet) {
            for (std::size_t i = 0; i < tables.size(); ++i)
                out << (i ? "\n" : "") << render(tables[i].second);
        }
    } catch (const std::exception& e) {
        log.error("{}", e.what());
        return kExitRuntime;
    }
    return kExitOk;
}

} // namespace

int run_app(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Activity-weighted proof-of-work simulator", "rpoa"};
    app.set_version_flag("--version", std::string("rpoa ") + RPOA_VERSION);
    app.require_subcommand(1);

    struct Command {
        std::string name;
        ExperimentKind kind;
        CLI::App* sub = nullptr;
        CommonOptions opts;
    };
    std::vector<Command> commands;
    commands.reserve(5);
    commands.push_back({"run", ExperimentKind::run, nullptr, {}});
    commands.push_back({"attack", ExperimentKind::attack, nullptr, {}});
    commands.push_back({"sybil", ExperimentKind::sybil, nullptr, {}});
    commands.push_back({"theorem1", ExperimentKind::theorem1, nullptr, {}});
    commands.push_back({"retarget-sweep", ExperimentKind::retarget, nullptr, {}});

    const char* descriptions[] = {
        "Run the protocol loop and write per-block and per-miner tables",
        "Private-fork double-spend race over seeded runs",
        "One identity against k identities splitting the same resources",
        "Monte-Carlo estimate of the activity bound against n_b/n_u",
        "Retarget convergence over an ensemble of seeded runs",
    };

    Overrides ov;
    for (std::size_t i = 0; i < commands.size(); ++i) {
        auto& c = commands[i];
        c.sub = app.add_subcommand(c.name, descriptions[i]);
        add_common(c.sub, c.opts, "rpoa-results");
        c.sub->add_option("--blocks", ov.blocks, "Override duration_blocks");
    }
    commands[1].sub->add_option("--share", ov.share, "Adversary share of total hash rate");
    commands[1].sub->add_option("--depth", ov.depth, "Blocks the fork starts behind");
    commands[1].sub->add_option("--budget", ov.budget, "Race length in blocks");
    commands[1].sub->add_option("--runs", ov.runs, "Seeded runs");
    commands[2].sub->add_option("--sybils", ov.sybils, "Identities in the cluster");
    commands[3].sub->add_option("--grid", ov.grid, "'default' or 'n_u:n_b:n_m:gamma;...'");
    commands[3].sub->add_option("--samples", ov.samples, "Samples per grid cell");
    commands[4].sub->add_option("--windows", ov.windows, "Retarget windows to sweep")->delimiter(',');
    commands[4].sub->add_option("--runs", ov.runs, "Seeded runs per window");

    CommonOptions fee_opts;
    FeeTableOptions fee_table;
    auto* fees_cmd = app.add_subcommand("fees-table", "Print entrance and upload fee grids");
    add_common(fees_cmd, fee_opts, "");
    fees_cmd->add_option("--heights", fee_table.heights, "Chain heights for the entrance fee")->delimiter(',');
    fees_cmd->add_option("--worths", fee_table.worths, "Service worths for the upload fee")->delimiter(',');
    fees_cmd->add_option("--psis", fee_table.psis, "Payer activities for the upload fee")->delimiter(',');
    fees_cmd->add_option("--gamma-e", fee_table.gamma_e, "Entrance fee base");
    fees_cmd->add_option("--alpha-fee", fee_table.alpha_fee, "Service fee base");
    fees_cmd->add_option("--omega-w", fee_table.omega_w, "Maximum block worth");
    fees_cmd->add_option("--gamma-u", fee_table.gamma_u, "Upload fee multiplier");

    if (!args.empty() && !args.front().empty() && args.front().front() != '-') {
        const auto subs = app.get_subcommands([](const CLI::App*) { return true; });
        const bool known = std::any_of(subs.begin(), subs.end(), [&](const CLI::App* s) {
            return s->get_name() == args.front();
        });
        if (!known) {
            err << "rpoa: unknown subcommand '" << args.front() << "'\n\n" << app.help();
            return kExitUsage;
        }
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion& e) {
        out << e.what() << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "rpoa: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    for (auto& c : commands) {
        if (c.sub->parsed()) {
            auto log = make_logger(c.opts.quiet);
            return run_experiment_command(c.name, c.kind, c.opts, ov, out, *log);
        }
    }
    if (fees_cmd->parsed()) {
        auto log = make_logger(fee_opts.quiet);
        const bool out_given = fees_cmd->count("--out") > 0;
        return run_fees_table(fee_opts, fee_table, out_given, out, *log);
    }
    err << app.help();
    return kExitUsage;
}

} // namespace rpoa::cli
