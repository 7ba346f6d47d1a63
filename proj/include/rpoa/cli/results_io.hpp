#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "rpoa/simnet/simnet.hpp"

namespace rpoa::cli {

enum class OutputFormat { csv, json };

/// Number text with at most 12 significant digits ("%.12g").
std::string format_number(double v);
/// v rounded to 12 significant digits; non-finite values pass through.
double round12(double v);
/// Exact decimal text of an atom amount in coins, trailing zeros trimmed.
std::string coins_text(Amount atoms);
/// Exact decimal text of a millisecond count in seconds.
std::string seconds_text(std::int64_t ms);
/// RFC 4180 quoting when the field needs it.
std::string csv_escape(const std::string& field);

/// A number whose decimal text is already exact; CSV copies the text, JSON parses it.
struct Decimal {
    std::string text;
};

using Cell = std::variant<std::string, double, std::int64_t, std::uint64_t, Decimal>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    [[nodiscard]] std::string to_csv() const;
    [[nodiscard]] nlohmann::ordered_json to_json() const;
};

Table blocks_table(const simnet::SimResult& result);
Table miners_table(const simnet::SimResult& result);
/// Extra per-experiment table (attack runs, theorem-1 cells, retarget series), if any.
std::optional<std::pair<std::string, Table>> experiment_table(const simnet::SimResult& result);

/// Ordered summary document; every double rounded to 12 significant digits.
nlohmann::ordered_json summary_json(const simnet::SimResult& result);

/// Base name of the extra table an experiment kind writes, if it writes one.
std::optional<std::string> experiment_table_name(simnet::ExperimentKind kind);

/// File names emit_results writes for this experiment kind, in write order.
std::vector<std::string> result_files(simnet::ExperimentKind kind, OutputFormat format);

/// Writes `content` to `path`; failures throw std::runtime_error naming the path.
void write_text_file(const std::filesystem::path& path, const std::string& content);

/// Writes every file from result_files into `dir` (created if needed).
void emit_results(const simnet::SimResult& result, const std::filesystem::path& dir, OutputFormat format);

struct RunManifest {
    std::string command;
    std::string scenario_path; // empty for built-in defaults
    std::uint64_t seed = 0;
    std::string tool_version;
    std::string started_at;
    std::optional<std::string> finished_at;
    std::string output_dir;
    std::vector<std::string> files;
};

std::string manifest_json(const RunManifest& manifest);

/// Recursively rounds every floating-point value to 12 significant digits.
void round_numbers(nlohmann::ordered_json& doc);

} // namespace rpoa::cli
