#include "rpoa/cli/scenario_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace rpoa::cli {

using simnet::ScenarioError;
using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

ScenarioSyntaxError::ScenarioSyntaxError(std::size_t line, std::size_t column, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
      line_(line),
      column_(column)
{
}

namespace {

/// Reads the members of one JSON object, remembering which keys were used so
/// leftovers can be reported.
class ObjectReader {
public:
    ObjectReader(const Json& obj, std::string path) : obj_(obj), path_(std::move(path))
    {
        if (!obj_.is_object())
            throw ScenarioError(path_.empty() ? "<root>" : path_, "expected a table/object");
    }

    [[nodiscard]] std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const Json* find(const std::string& key)
    {
        auto it = obj_.find(key);
        if (it == obj_.end())
            return nullptr;
        used_.insert(key);
        return &*it;
    }

    void number(const std::string& key, double& out)
    {
        if (const Json* v = find(key)) {
            if (!v->is_number())
                throw ScenarioError(field(key), "expected a number");
            out = v->get<double>();
        }
    }

    template <typename U>
    void unsigned_int(const std::string& key, U& out)
    {
        if (const Json* v = find(key)) {
            if (!v->is_number_unsigned())
                throw ScenarioError(field(key), "expected a non-negative integer");
            const auto raw = v->get<std::uint64_t>();
            if (raw > std::numeric_limits<U>::max())
                throw ScenarioError(field(key), "integer out of range");
            out = static_cast<U>(raw);
        }
    }

    void string(const std::string& key, std::string& out)
    {
        if (const Json* v = find(key)) {
            if (!v->is_string())
                throw ScenarioError(field(key), "expected a string");
            out = v->get<std::string>();
        }
    }

    /// Rejects any key that no reader asked for.
    void finish() const
    {
        for (const auto& [key, value] : obj_.items()) {
            if (!used_.contains(key))
                throw ScenarioError(field(key), "unknown key");
        }
    }

private:
    const Json& obj_;
    std::string path_;
    std::set<std::string> used_;
};

const Json& require_array(const Json& v, const std::string& field)
{
    if (!v.is_array())
        throw ScenarioError(field, "expected an array");
    return v;
}

void read_chain(const Json& v, consensus::ChainParams& chain)
{
    ObjectReader r(v, "chain");
    r.unsigned_int("hash_bits_beta", chain.hash_bits_beta);
    r.number("target_interval_CT", chain.target_interval_CT);
    r.unsigned_int("retarget_window_W", chain.retarget_window_W);
    r.finish();
}

void read_activity(const Json& v, activity::ActivityParams& a)
{
    ObjectReader r(v, "activity");
    r.number("time_scale_T", a.time_scale_T);
    r.number("decay_exponent_r", a.decay_exponent_r);
    r.number("worth_cap_chi", a.worth_cap_chi);
    r.number("worth_scale_L", a.worth_scale_L);
    r.number("activity_scale_alpha", a.activity_scale_alpha);
    r.finish();
}

void read_fees(const Json& v, fees::FeeSchedule& f)
{
    ObjectReader r(v, "fees");
    r.number("entrance_base_gamma_e", f.entrance_base_gamma_e);
    r.number("service_base_alpha_fee", f.service_base_alpha_fee);
    r.number("max_block_worth_omega_w", f.max_block_worth_omega_w);
    r.number("upload_base_gamma_u", f.upload_base_gamma_u);
    r.unsigned_int("stake_lock_blocks", f.stake_lock_blocks);
    r.number("block_reward", f.block_reward);
    r.finish();
}

void read_service(const Json& v, const std::string& path, simnet::ServicePolicy& s)
{
    ObjectReader r(v, path);
    r.number("rate", s.rate);
    r.number("worth_min", s.worth_min);
    r.number("worth_max", s.worth_max);
    r.unsigned_int("period_blocks", s.period_blocks);
    r.number("period_worth", s.period_worth);
    r.number("miner_wage", s.miner_wage);
    if (const Json* script = r.find("script")) {
        const std::string field = r.field("script");
        require_array(*script, field);
        s.script.clear();
        for (std::size_t i = 0; i < script->size(); ++i) {
            ObjectReader e((*script)[i], field + "[" + std::to_string(i) + "]");
            simnet::ScriptedService entry;
            e.unsigned_int("height", entry.height);
            e.number("worth", entry.worth);
            e.finish();
            s.script.push_back(entry);
        }
    }
    r.finish();
}

void read_miners(const Json& v, std::vector<simnet::MinerAgent>& miners)
{
    require_array(v, "miners");
    miners.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string path = "miners[" + std::to_string(i) + "]";
        ObjectReader r(v[i], path);
        simnet::MinerAgent m;
        r.string("id", m.id);
        r.number("hash_rate_g", m.hash_rate_g);
        std::string behavior = simnet::to_string(m.behavior);
        r.string("behavior", behavior);
        auto parsed = simnet::parse_behavior(behavior);
        if (!parsed)
            throw ScenarioError(r.field("behavior"), "unknown behavior '" + behavior + "'");
        m.behavior = *parsed;
        r.number("initial_balance", m.initial_balance);
        if (const Json* s = r.find("service"))
            read_service(*s, r.field("service"), m.service);
        r.finish();
        miners.push_back(std::move(m));
    }
}

void read_experiment(const Json& v, simnet::Scenario& s)
{
    ObjectReader r(v, "experiment");
    const Json* kind_json = r.find("kind");
    if (!kind_json)
        throw ScenarioError("experiment.kind", "missing");
    if (!kind_json->is_string())
        throw ScenarioError("experiment.kind", "expected a string");
    const auto kind = simnet::parse_experiment_kind(kind_json->get<std::string>());
    if (!kind)
        throw ScenarioError("experiment.kind", "unknown experiment kind '" + kind_json->get<std::string>() + "'");
    s.kind = *kind;

    switch (s.kind) {
    case simnet::ExperimentKind::run:
        break;
    case simnet::ExperimentKind::attack:
        r.number("adversary_share", s.attack.adversary_share);
        r.unsigned_int("depth", s.attack.depth);
        r.unsigned_int("budget", s.attack.budget);
        r.unsigned_int("runs", s.attack.runs);
        r.unsigned_int("warmup_blocks", s.attack.warmup_blocks);
        break;
    case simnet::ExperimentKind::sybil:
        r.unsigned_int("sybil_count", s.sybil.sybil_count);
        r.number("service_worth", s.sybil.service_worth);
        r.unsigned_int("service_period", s.sybil.service_period);
        r.number("identity_balance", s.sybil.identity_balance);
        break;
    case simnet::ExperimentKind::theorem1: {
        auto& t = s.theorem1;
        if (const Json* grid = r.find("grid")) {
            require_array(*grid, "experiment.grid");
            t.grid.clear();
            for (std::size_t i = 0; i < grid->size(); ++i) {
                ObjectReader c((*grid)[i], "experiment.grid[" + std::to_string(i) + "]");
                simnet::Theorem1Cell cell;
                c.number("n_u", cell.n_u);
                c.number("n_b", cell.n_b);
                c.number("n_m", cell.n_m);
                c.number("gamma", cell.gamma);
                c.finish();
                t.grid.push_back(cell);
            }
        }
        r.unsigned_int("samples", t.samples);
        r.number("service_fraction_c", t.service_fraction_c);
        r.number("zeta_sd_ratio", t.zeta_sd_ratio);
        if (const Json* variants = r.find("variants")) {
            require_array(*variants, "experiment.variants");
            t.variants.clear();
            for (std::size_t i = 0; i < variants->size(); ++i) {
                ObjectReader c((*variants)[i], "experiment.variants[" + std::to_string(i) + "]");
                simnet::ActivityVariant var;
                c.number("time_scale_T", var.time_scale_T);
                c.number("decay_exponent_r", var.decay_exponent_r);
                c.number("worth_scale_L", var.worth_scale_L);
                c.finish();
                t.variants.push_back(var);
            }
        }
        r.number("sup_worth", t.sup_worth);
        break;
    }
    case simnet::ExperimentKind::retarget: {
        auto& k = s.retarget;
        if (const Json* windows = r.find("windows")) {
            require_array(*windows, "experiment.windows");
            k.windows.clear();
            for (std::size_t i = 0; i < windows->size(); ++i) {
                const Json& w = (*windows)[i];
                if (!w.is_number_unsigned() || w.get<std::uint64_t>() > UINT32_MAX)
                    throw ScenarioError("experiment.windows[" + std::to_string(i) + "]",
                                        "expected a non-negative integer");
                k.windows.push_back(static_cast<std::uint32_t>(w.get<std::uint64_t>()));
            }
        }
        r.unsigned_int("runs", k.runs);
        r.unsigned_int("trailing", k.trailing);
        r.unsigned_int("settle_height", k.settle_height);
        r.number("tolerance", k.tolerance);
        r.unsigned_int("reconverge_blocks", k.reconverge_blocks);
        break;
    }
    }
    r.finish();
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte)
{
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

} // namespace

simnet::Scenario parse_scenario_text(std::string_view text, std::optional<std::uint64_t> seed_override)
{
    Json root;
    try {
        root = Json::parse(text.begin(), text.end(), nullptr, true, /*ignore_comments=*/true);
    } catch (const Json::parse_error& e) {
        // nlohmann reports the byte just past the offending token.
        const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
        const auto [line, column] = line_column(text, at);
        std::string what = e.what();
        if (auto pos = what.find("syntax error"); pos != std::string::npos)
            what = what.substr(pos);
        throw ScenarioSyntaxError(line, column, what);
    }

    simnet::Scenario s;
    ObjectReader r(root, "");
    const Json* experiment = r.find("experiment");
    if (!experiment)
        throw ScenarioError("experiment", "missing (needs at least experiment.kind)");
    read_experiment(*experiment, s);

    bool have_seed = false;
    if (const Json* seed = r.find("seed")) {
        if (!seed->is_number_unsigned())
            throw ScenarioError("seed", "expected a non-negative 64-bit integer");
        s.seed = seed->get<std::uint64_t>();
        have_seed = true;
    }
    if (seed_override) {
        s.seed = *seed_override;
        have_seed = true;
    }
    if (!have_seed)
        throw ScenarioError("seed", "missing; give it in the scenario or with --seed");

    r.unsigned_int("duration_blocks", s.duration_blocks);
    std::string mode = simnet::to_string(s.mining_mode);
    r.string("mining_mode", mode);
    auto parsed_mode = simnet::parse_mining_mode(mode);
    if (!parsed_mode)
        throw ScenarioError("mining_mode", "unknown mining mode '" + mode + "'");
    s.mining_mode = *parsed_mode;

    if (const Json* v = r.find("chain"))
        read_chain(*v, s.chain);
    if (const Json* v = r.find("activity"))
        read_activity(*v, s.activity);
    if (const Json* v = r.find("fees"))
        read_fees(*v, s.fees);
    if (const Json* v = r.find("miners"))
        read_miners(*v, s.miners);
    if (const Json* v = r.find("hash_rate_step")) {
        if (!v->is_null()) {
            ObjectReader step(*v, "hash_rate_step");
            simnet::HashRateStep hs;
            step.unsigned_int("height", hs.height);
            step.number("factor", hs.factor);
            step.finish();
            s.hash_rate_step = hs;
        }
    }
    r.finish();
    s.validate();
    return s;
}

simnet::Scenario parse_scenario_file(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ScenarioError("path", "cannot open scenario file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_scenario_text(buf.str(), seed_override);
    } catch (const ScenarioSyntaxError& e) {
        throw ScenarioSyntaxError(e.line(), e.column(), path.string() + ": " + e.what());
    }
}

std::string emit_scenario(const simnet::Scenario& s)
{
    OrderedJson root;
    OrderedJson experiment;
    experiment["kind"] = simnet::to_string(s.kind);
    switch (s.kind) {
    case simnet::ExperimentKind::run:
        break;
    case simnet::ExperimentKind::attack:
        experiment["adversary_share"] = s.attack.adversary_share;
        experiment["depth"] = s.attack.depth;
        experiment["budget"] = s.attack.budget;
        experiment["runs"] = s.attack.runs;
        experiment["warmup_blocks"] = s.attack.warmup_blocks;
        break;
    case simnet::ExperimentKind::sybil:
        experiment["sybil_count"] = s.sybil.sybil_count;
        experiment["service_worth"] = s.sybil.service_worth;
        experiment["service_period"] = s.sybil.service_period;
        experiment["identity_balance"] = s.sybil.identity_balance;
        break;
    case simnet::ExperimentKind::theorem1: {
        OrderedJson grid = OrderedJson::array();
        for (const auto& c : s.theorem1.grid)
            grid.push_back({{"n_u", c.n_u}, {"n_b", c.n_b}, {"n_m", c.n_m}, {"gamma", c.gamma}});
        experiment["grid"] = grid;
        experiment["samples"] = s.theorem1.samples;
        experiment["service_fraction_c"] = s.theorem1.service_fraction_c;
        experiment["zeta_sd_ratio"] = s.theorem1.zeta_sd_ratio;
        OrderedJson variants = OrderedJson::array();
        for (const auto& v : s.theorem1.variants) {
            variants.push_back({{"time_scale_T", v.time_scale_T},
                                {"decay_exponent_r", v.decay_exponent_r},
                                {"worth_scale_L", v.worth_scale_L}});
        }
        experiment["variants"] = variants;
        experiment["sup_worth"] = s.theorem1.sup_worth;
        break;
    }
    case simnet::ExperimentKind::retarget:
        experiment["windows"] = s.retarget.windows;
        experiment["runs"] = s.retarget.runs;
        experiment["trailing"] = s.retarget.trailing;
        experiment["settle_height"] = s.retarget.settle_height;
        experiment["tolerance"] = s.retarget.tolerance;
        experiment["reconverge_blocks"] = s.retarget.reconverge_blocks;
        break;
    }
    root["experiment"] = experiment;
    root["seed"] = s.seed;
    root["duration_blocks"] = s.duration_blocks;
    root["mining_mode"] = simnet::to_string(s.mining_mode);
    root["chain"] = {{"hash_bits_beta", s.chain.hash_bits_beta},
                     {"target_interval_CT", s.chain.target_interval_CT},
                     {"retarget_window_W", s.chain.retarget_window_W}};
    root["activity"] = {{"time_scale_T", s.activity.time_scale_T},
                        {"decay_exponent_r", s.activity.decay_exponent_r},
                        {"worth_cap_chi", s.activity.worth_cap_chi},
                        {"worth_scale_L", s.activity.worth_scale_L},
                        {"activity_scale_alpha", s.activity.activity_scale_alpha}};
    root["fees"] = {{"entrance_base_gamma_e", s.fees.entrance_base_gamma_e},
                    {"service_base_alpha_fee", s.fees.service_base_alpha_fee},
                    {"max_block_worth_omega_w", s.fees.max_block_worth_omega_w},
                    {"upload_base_gamma_u", s.fees.upload_base_gamma_u},
                    {"stake_lock_blocks", s.fees.stake_lock_blocks},
                    {"block_reward", s.fees.block_reward}};
    OrderedJson miners = OrderedJson::array();
    for (const auto& m : s.miners) {
        OrderedJson script = OrderedJson::array();
        for (const auto& e : m.service.script)
            script.push_back({{"height", e.height}, {"worth", e.worth}});
        OrderedJson service = {{"rate", m.service.rate},
                               {"worth_min", m.service.worth_min},
                               {"worth_max", m.service.worth_max},
                               {"period_blocks", m.service.period_blocks},
                               {"period_worth", m.service.period_worth},
                               {"miner_wage", m.service.miner_wage},
                               {"script", script}};
        miners.push_back({{"id", m.id},
                          {"hash_rate_g", m.hash_rate_g},
                          {"behavior", simnet::to_string(m.behavior)},
                          {"initial_balance", m.initial_balance},
                          {"service", service}});
    }
    root["miners"] = miners;
    if (s.hash_rate_step)
        root["hash_rate_step"] = {{"height", s.hash_rate_step->height}, {"factor", s.hash_rate_step->factor}};
    else
        root["hash_rate_step"] = nullptr;
    return root.dump(2) + "\n";
}

} // namespace rpoa::cli
