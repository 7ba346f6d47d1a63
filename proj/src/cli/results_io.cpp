#include "rpoa/cli/results_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include "rpoa/cli/scenario_io.hpp"

namespace rpoa::cli {

using OrderedJson = nlohmann::ordered_json;

std::string format_number(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

double round12(double v)
{
    if (!std::isfinite(v))
        return v;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::strtod(buf, nullptr);
}

namespace {

std::string fixed_point_text(std::int64_t value, std::int64_t scale, int digits)
{
    const bool negative = value < 0;
    const auto magnitude = negative ? -static_cast<std::uint64_t>(value) : static_cast<std::uint64_t>(value);
    const auto s = static_cast<std::uint64_t>(scale);
    std::string out = (negative ? "-" : "") + std::to_string(magnitude / s);
    std::string frac = std::to_string(magnitude % s);
    frac.insert(0, static_cast<std::size_t>(digits) - frac.size(), '0');
    while (!frac.empty() && frac.back() == '0')
        frac.pop_back();
    if (!frac.empty())
        out += "." + frac;
    return out;
}

} // namespace

std::string coins_text(Amount atoms) { return fixed_point_text(atoms, kAtomsPerCoin, 8); }

std::string seconds_text(std::int64_t ms) { return fixed_point_text(ms, 1000, 3); }

std::string csv_escape(const std::string& field)
{
    if (field.find_first_of(",\"\r\n") == std::string::npos)
        return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

namespace {

struct CsvCell {
    std::string operator()(const std::string& s) const { return csv_escape(s); }
    std::string operator()(double v) const { return format_number(v); }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(std::uint64_t v) const { return std::to_string(v); }
    std::string operator()(const Decimal& d) const { return d.text; }
};

struct JsonCell {
    OrderedJson operator()(const std::string& s) const { return s; }
    OrderedJson operator()(double v) const { return std::isfinite(v) ? OrderedJson(round12(v)) : OrderedJson(); }
    OrderedJson operator()(std::int64_t v) const { return v; }
    OrderedJson operator()(std::uint64_t v) const { return v; }
    OrderedJson operator()(const Decimal& d) const { return OrderedJson::parse(d.text); }
};

} // namespace

std::string Table::to_csv() const
{
    std::string out;
    for (std::size_t i = 0; i < columns.size(); ++i)
        out += (i ? "," : "") + csv_escape(columns[i]);
    out += "\r\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out += (i ? "," : "") + std::visit(CsvCell{}, row[i]);
        out += "\r\n";
    }
    return out;
}

OrderedJson Table::to_json() const
{
    OrderedJson out = OrderedJson::array();
    for (const auto& row : rows) {
        OrderedJson obj = OrderedJson::object();
        for (std::size_t i = 0; i < row.size() && i < columns.size(); ++i)
            obj[columns[i]] = std::visit(JsonCell{}, row[i]);
        out.push_back(std::move(obj));
    }
    return out;
}

Table blocks_table(const simnet::SimResult& result)
{
    Table t;
    t.columns = {"height", "timestamp_s", "miner_id", "psi_at_mine", "threshold_hex", "interblock_s"};
    const unsigned beta = result.scenario.chain.hash_bits_beta;
    for (const auto& b : result.blocks) {
        t.rows.push_back({std::uint64_t{b.height}, Decimal{seconds_text(b.timestamp_ms)}, b.miner, b.psi_at_mine,
                          b.threshold.to_hex(beta), Decimal{seconds_text(b.interblock_ms)}});
    }
    return t;
}

Table miners_table(const simnet::SimResult& result)
{
    Table t;
    t.columns = {"miner_id", "hash_rate", "blocks_won", "fees_paid", "final_psi", "final_balance"};
    for (const auto& m : result.miners) {
        t.rows.push_back({m.id, m.hash_rate, std::uint64_t{m.blocks_won}, Decimal{coins_text(m.fees_paid())},
                          m.final_psi, Decimal{coins_text(m.final_balance)}});
    }
    return t;
}

std::optional<std::pair<std::string, Table>> experiment_table(const simnet::SimResult& result)
{
    if (result.attack) {
        Table t;
        t.columns = {"seed", "success", "blocks_used", "adversary_blocks", "honest_blocks", "adversary_power"};
        for (const auto& r : result.attack->runs) {
            t.rows.push_back({std::uint64_t{r.seed}, std::uint64_t{r.success ? 1u : 0u}, std::uint64_t{r.blocks_used},
                              std::uint64_t{r.adversary_blocks}, std::uint64_t{r.honest_blocks}, r.adversary_power});
        }
        return std::pair{*experiment_table_name(result.kind), std::move(t)};
    }
    if (result.theorem1) {
        Table t;
        t.columns = {"series",      "time_scale_T", "decay_exponent_r", "worth_scale_L", "n_u",
                     "n_b",         "n_m",          "gamma",            "nu",            "mean_zeta",
                     "clamp_fraction", "expected_xi", "analytic_xi"};
        for (std::size_t i = 0; i < result.theorem1->series.size(); ++i) {
            const auto& s = result.theorem1->series[i];
            for (const auto& c : s.cells) {
                t.rows.push_back({std::uint64_t{i}, s.activity.time_scale_T, s.activity.decay_exponent_r,
                                  s.activity.worth_scale_L, c.cell.n_u, c.cell.n_b, c.cell.n_m, c.cell.gamma, c.nu,
                                  c.mean_zeta, c.clamp_fraction, c.expected_xi, c.analytic_xi});
            }
        }
        return std::pair{*experiment_table_name(result.kind), std::move(t)};
    }
    if (result.retarget && !result.retarget->windows.empty()) {
        Table t;
        t.columns = {"height"};
        for (const auto& w : result.retarget->windows)
            t.columns.push_back("trailing_mean_s_W" + std::to_string(w.window));
        const std::size_t n = result.retarget->windows.front().ensemble_trailing_mean_s.size();
        const std::uint64_t trailing = result.scenario.retarget.trailing;
        for (std::size_t h = trailing; h < n; ++h) {
            std::vector<Cell> row{std::uint64_t{h}};
            for (const auto& w : result.retarget->windows)
                row.emplace_back(w.ensemble_trailing_mean_s[h]);
            t.rows.push_back(std::move(row));
        }
        return std::pair{*experiment_table_name(result.kind), std::move(t)};
    }
    return std::nullopt;
}

void round_numbers(OrderedJson& doc)
{
    if (doc.is_number_float()) {
        const double v = doc.get<double>();
        doc = std::isfinite(v) ? OrderedJson(round12(v)) : OrderedJson();
    } else if (doc.is_structured()) {
        for (auto& child : doc)
            round_numbers(child);
    }
}

namespace {

OrderedJson fit_json(const simnet::RegressionFit& fit)
{
    return {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r2", fit.r2}};
}

OrderedJson side_json(const simnet::SybilSide& s)
{
    return {{"label", s.label},
            {"identities", s.ids},
            {"hash_rate", s.hash_rate},
            {"blocks_won", s.blocks_won},
            {"entrance_fees", to_coins(s.entrance_fees)},
            {"upload_fees", to_coins(s.upload_fees)},
            {"weighted_final_psi", s.weighted_final_psi}};
}

OrderedJson optional_number(const std::optional<double>& v) { return v ? OrderedJson(*v) : OrderedJson(); }

} // namespace

OrderedJson summary_json(const simnet::SimResult& result)
{
    OrderedJson doc;
    doc["experiment"] = simnet::to_string(result.kind);
    doc["seed"] = result.scenario.seed;
    doc["parameters"] = OrderedJson::parse(emit_scenario(result.scenario));

    const auto& m = result.metrics;
    OrderedJson power = OrderedJson::object();
    for (const auto& [id, share] : m.final_power.shares)
        power[id] = share;
    doc["metrics"] = {{"chain_length", m.chain_length},
                      {"mean_interblock_s", m.mean_interblock_s},
                      {"final_eta", m.final_eta},
                      {"saturation_fraction", m.saturation_fraction},
                      {"total_supply", to_coins(m.total_supply)},
                      {"final_power", power}};
    doc["warnings"] = result.warnings;

    if (result.attack) {
        const auto& a = *result.attack;
        std::uint64_t successes = 0;
        for (const auto& r : a.runs)
            successes += r.success ? 1 : 0;
        doc["attack"] = {{"adversary_share", a.adversary_share},
                         {"depth", a.depth},
                         {"budget", a.budget},
                         {"runs", a.runs.size()},
                         {"successes", successes},
                         {"success_rate", a.success_rate},
                         {"reference_probability", a.reference_probability}};
    }
    if (result.sybil) {
        const auto& s = *result.sybil;
        doc["sybil"] = {{"sybil_count", s.sybil_count},
                        {"single", side_json(s.single)},
                        {"cluster", side_json(s.cluster)},
                        {"entrance_fee_ratio", s.entrance_fee_ratio},
                        {"block_sigma", s.block_sigma}};
    }
    if (result.theorem1) {
        const auto& t = *result.theorem1;
        OrderedJson series = OrderedJson::array();
        for (const auto& s : t.series) {
            series.push_back({{"time_scale_T", s.activity.time_scale_T},
                              {"decay_exponent_r", s.activity.decay_exponent_r},
                              {"worth_scale_L", s.activity.worth_scale_L},
                              {"xi_sup", s.xi_sup},
                              {"fit", fit_json(s.fit)}});
        }
        const auto& base = t.series.front().fit;
        doc["theorem1"] = {{"slope", base.slope},
                           {"intercept", base.intercept},
                           {"r2", base.r2},
                           {"max_slope_deviation", t.max_slope_deviation},
                           {"clamping_bias", t.clamping_bias},
                           {"n_m_residual_slope", optional_number(t.n_m_residual_slope)},
                           {"series", series}};
    }
    if (result.retarget) {
        OrderedJson windows = OrderedJson::array();
        for (const auto& w : result.retarget->windows) {
            windows.push_back({{"window", w.window},
                               {"runs", w.runs},
                               {"steady_mean_interval_s", w.steady_mean_interval_s},
                               {"settled_max_deviation", w.settled_max_deviation},
                               {"settled", w.settled},
                               {"post_step_max_deviation", optional_number(w.post_step_max_deviation)},
                               {"reconverged", w.reconverged},
                               {"reconverged_at", w.reconverged_at ? OrderedJson(*w.reconverged_at) : OrderedJson()},
                               {"single_run_max_deviation", w.single_run_max_deviation}});
        }
        doc["retarget"] = {{"windows", windows}};
    }
    round_numbers(doc);
    return doc;
}

std::optional<std::string> experiment_table_name(simnet::ExperimentKind kind)
{
    switch (kind) {
    case simnet::ExperimentKind::attack: return "attack_runs";
    case simnet::ExperimentKind::theorem1: return "theorem1_cells";
    case simnet::ExperimentKind::retarget: return "retarget_trailing";
    default: return std::nullopt;
    }
}

std::vector<std::string> result_files(simnet::ExperimentKind kind, OutputFormat format)
{
    const std::string ext = format == OutputFormat::csv ? ".csv" : ".json";
    std::vector<std::string> files{"blocks" + ext, "miners" + ext};
    if (auto extra = experiment_table_name(kind))
        files.push_back(*extra + ext);
    files.emplace_back("summary.json");
    return files;
}

void write_text_file(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << content;
    out.flush();
    if (!out)
        throw std::runtime_error("write failed: " + path.string());
}

namespace {

std::string render(const Table& t, OutputFormat format)
{
    return format == OutputFormat::csv ? t.to_csv() : t.to_json().dump(2) + "\n";
}

} // namespace

void emit_results(const simnet::SimResult& result, const std::filesystem::path& dir, OutputFormat format)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
    const std::string ext = format == OutputFormat::csv ? ".csv" : ".json";
    write_text_file(dir / ("blocks" + ext), render(blocks_table(result), format));
    write_text_file(dir / ("miners" + ext), render(miners_table(result), format));
    if (auto extra = experiment_table(result))
        write_text_file(dir / (extra->first + ext), render(extra->second, format));
    write_text_file(dir / "summary.json", summary_json(result).dump(2) + "\n");
}

std::string manifest_json(const RunManifest& m)
{
    OrderedJson doc;
    doc["command"] = m.command;
    doc["scenario_path"] = m.scenario_path.empty() ? OrderedJson() : OrderedJson(m.scenario_path);
    doc["seed"] = m.seed;
    doc["tool_version"] = m.tool_version;
    doc["started_at"] = m.started_at;
    doc["finished_at"] = m.finished_at ? OrderedJson(*m.finished_at) : OrderedJson();
    doc["output_dir"] = m.output_dir;
    doc["files"] = m.files;
    return doc.dump(2) + "\n";
}

} // namespace rpoa::cli
