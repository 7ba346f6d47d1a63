#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "rpoa/simnet/scenario.hpp"

namespace rpoa::cli {

/// Malformed scenario text; carries the 1-based line and column of the problem.
class ScenarioSyntaxError : public std::runtime_error {
public:
    ScenarioSyntaxError(std::size_t line, std::size_t column, const std::string& message);

    [[nodiscard]] std::size_t line() const noexcept { return line_; }
    [[nodiscard]] std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Parses and validates a scenario. Unknown keys, wrong types and missing seeds
/// throw simnet::ScenarioError naming the field; bad syntax throws ScenarioSyntaxError.
/// `seed_override` replaces (or supplies) the seed.
simnet::Scenario parse_scenario_text(std::string_view text, std::optional<std::uint64_t> seed_override = {});

/// Reads `path` and parses it; I/O failures throw simnet::ScenarioError on field "path".
simnet::Scenario parse_scenario_file(const std::filesystem::path& path,
                                     std::optional<std::uint64_t> seed_override = {});

/// Canonical text form: every field spelled out in a fixed order. Parsing the
/// output yields a Scenario equal to the input.
std::string emit_scenario(const simnet::Scenario& scenario);

} // namespace rpoa::cli
