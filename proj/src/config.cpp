#include "dia/config.hpp"

#include "dia/errors.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace dia {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    double out{};
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
        throw ConfigError(key, "expected a finite number, got '" + v + "'");
    return out;
}

long long to_integer(const std::string& key, const std::string& v) {
    long long out{};
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(key, "expected an integer, got '" + v + "'");
    return out;
}

int to_int(const std::string& key, const std::string& v) {
    const long long x = to_integer(key, v);
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
        throw ConfigError(key, "integer out of range");
    return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError(key, "expected true or false, got '" + v + "'");
}

SolveMode to_mode(const std::string& key, const std::string& v) {
    if (v == "fixed") return SolveMode::Fixed;
    if (v == "dynamic-pre") return SolveMode::DynamicPre;
    if (v == "dynamic-all") return SolveMode::DynamicAll;
    throw ConfigError(key, "expected fixed, dynamic-pre or dynamic-all, got '" + v + "'");
}

struct Loader {
    RunConfig cfg;
    bool rho_set{false};
    double start_age{55};
    double retirement_age{65};

    using Setter = std::function<void(Loader&, const std::string&, const std::string&)>;

    static const std::vector<std::pair<std::string, Setter>>& table() {
        static const std::vector<std::pair<std::string, Setter>> t = {
            {"market.mu", [](Loader& l, auto& k, auto& v) { l.cfg.params.market.mu = to_double(k, v); }},
            {"market.sigma", [](Loader& l, auto& k, auto& v) { l.cfg.params.market.sigma = to_double(k, v); }},
            {"market.r", [](Loader& l, auto& k, auto& v) { l.cfg.params.market.r = to_double(k, v); }},
            {"market.rho",
             [](Loader& l, auto& k, auto& v) {
                 l.cfg.params.market.rho = to_double(k, v);
                 l.rho_set = true;
             }},
            {"market.nu", [](Loader& l, auto& k, auto& v) { l.cfg.params.market.nu = to_double(k, v); }},
            {"market.pi", [](Loader& l, auto& k, auto& v) { l.cfg.params.market.pi = to_double(k, v); }},
            {"mortality.lambda0", [](Loader& l, auto& k, auto& v) { l.cfg.params.mortality.lambda0 = to_double(k, v); }},
            {"mortality.m", [](Loader& l, auto& k, auto& v) { l.cfg.params.mortality.m = to_double(k, v); }},
            {"mortality.b", [](Loader& l, auto& k, auto& v) { l.cfg.params.mortality.b = to_double(k, v); }},
            {"preferences.gamma", [](Loader& l, auto& k, auto& v) { l.cfg.params.preferences.gamma = to_double(k, v); }},
            {"contract.Q", [](Loader& l, auto& k, auto& v) { l.cfg.params.contract.Q = to_double(k, v); }},
            {"contract.start_age", [](Loader& l, auto& k, auto& v) { l.start_age = to_double(k, v); }},
            {"contract.retirement_age", [](Loader& l, auto& k, auto& v) { l.retirement_age = to_double(k, v); }},
            {"grid.terminal_age", [](Loader& l, auto& k, auto& v) { l.cfg.params.terminal_age = to_double(k, v); }},
            {"grid.w_max", [](Loader& l, auto& k, auto& v) { l.cfg.grid.w_max = to_double(k, v); }},
            {"grid.w_nodes", [](Loader& l, auto& k, auto& v) { l.cfg.grid.w_nodes = to_int(k, v); }},
            {"grid.w_tail_max", [](Loader& l, auto& k, auto& v) { l.cfg.grid.w_tail_max = to_double(k, v); }},
            {"grid.tail_growth", [](Loader& l, auto& k, auto& v) { l.cfg.grid.tail_growth = to_double(k, v); }},
            {"grid.tail_max_ratio", [](Loader& l, auto& k, auto& v) { l.cfg.grid.tail_max_ratio = to_double(k, v); }},
            {"grid.I_max", [](Loader& l, auto& k, auto& v) { l.cfg.grid.I_max = to_double(k, v); }},
            {"grid.I_nodes", [](Loader& l, auto& k, auto& v) { l.cfg.grid.I_nodes = to_int(k, v); }},
            {"grid.steps_per_year", [](Loader& l, auto& k, auto& v) { l.cfg.steps_per_year = to_int(k, v); }},
            {"solver.mode", [](Loader& l, auto& k, auto& v) { l.cfg.mode = to_mode(k, v); }},
            {"solver.post_store_stride", [](Loader& l, auto& k, auto& v) { l.cfg.post_store_stride = to_int(k, v); }},
            {"solver.pre_store_stride", [](Loader& l, auto& k, auto& v) { l.cfg.pre_store_stride = to_int(k, v); }},
            {"output.dir", [](Loader& l, auto&, auto& v) { l.cfg.output_dir = v; }},
            {"sim.paths",
             [](Loader& l, auto& k, auto& v) {
                 const long long n = to_integer(k, v);
                 if (n < 1) throw ConfigError(k, "must be at least 1");
                 l.cfg.sim_paths = static_cast<std::size_t>(n);
             }},
            {"sim.dt", [](Loader& l, auto& k, auto& v) { l.cfg.sim_dt = to_double(k, v); }},
            {"sim.seed",
             [](Loader& l, auto& k, auto& v) {
                 std::uint64_t s{};
                 const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), s);
                 if (ec != std::errc() || ptr != v.data() + v.size())
                     throw ConfigError(k, "expected a non-negative integer, got '" + v + "'");
                 l.cfg.sim_seed = s;
             }},
            {"sim.antithetic", [](Loader& l, auto& k, auto& v) { l.cfg.sim_antithetic = to_bool(k, v); }},
        };
        return t;
    }

    void set(const std::string& key, const std::string& value) {
        for (const auto& [name, setter] : table()) {
            if (name == key) {
                setter(*this, key, value);
                return;
            }
        }
        throw ConfigError(key, "unknown configuration key");
    }

    void apply_line(const std::string& raw, const std::string& where) {
        std::string line = raw;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) return;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where, "expected key=value, got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(where, "empty key");
        set(key, value);
    }

    RunConfig finish() {
        if (!rho_set) cfg.params.market.rho = cfg.params.market.r;
        if (!(retirement_age > start_age))
            throw ConfigError("contract.retirement_age", "retirement age must exceed the start age");
        cfg.params.contract.x = start_age;
        cfg.params.contract.tau = retirement_age - start_age;
        cfg.validate();
        return cfg;
    }
};

template <typename F>
void rethrow_as(const std::string& key, F&& f) {
    try {
        f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(key, e.what());
    }
}

}  // namespace

std::string to_string(SolveMode mode) {
    switch (mode) {
        case SolveMode::Fixed: return "fixed";
        case SolveMode::DynamicPre: return "dynamic-pre";
        case SolveMode::DynamicAll: return "dynamic-all";
    }
    return "unknown";
}

PostSolverOptions RunConfig::post_options() const {
    PostSolverOptions o;
    o.mode = post_mode();
    o.steps_per_year = steps_per_year;
    o.store_stride = post_store_stride;
    return o;
}

PreSolverOptions RunConfig::pre_options() const {
    PreSolverOptions o;
    o.mode = pre_mode();
    o.steps_per_year = steps_per_year;
    o.store_stride = pre_store_stride;
    return o;
}

SimConfig RunConfig::sim_config(double age, double w, double income) const {
    SimConfig s;
    s.paths = sim_paths;
    s.dt_sim = sim_dt;
    s.seed = sim_seed;
    s.antithetic = sim_antithetic;
    s.age = age;
    s.w = w;
    s.I = income;
    return s;
}

void RunConfig::validate() const {
    rethrow_as("market", [&] { params.market.validate(); });
    rethrow_as("mortality", [&] { params.mortality.validate(); });
    if (params.preferences.gamma == 1.0)
        throw ConfigError("preferences.gamma", "gamma = 1 (log utility) is outside the CRRA family used here");
    rethrow_as("preferences.gamma", [&] { params.preferences.validate(); });
    rethrow_as("contract.Q", [&] { params.contract.validate(); });
    if (!(params.contract.tau > 0))
        throw ConfigError("contract.retirement_age", "retirement age must exceed the start age");
    if (!(params.terminal_age > params.retirement_age()))
        throw ConfigError("grid.terminal_age", "terminal age must exceed the retirement age");
    rethrow_as("grid", [&] { build_grid(grid); });
    if (steps_per_year < 1) throw ConfigError("grid.steps_per_year", "must be positive");
    if (post_store_stride < 1) throw ConfigError("solver.post_store_stride", "must be positive");
    if (pre_store_stride < 1) throw ConfigError("solver.pre_store_stride", "must be positive");
    if (!(sim_dt > 0) || sim_dt > 1.0 / steps_per_year * (1 + 1e-9))
        throw ConfigError("sim.dt", "must be positive and no larger than the solver time step");
    if (output_dir.empty()) throw ConfigError("output.dir", "must not be empty");
}

RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
    Loader loader;
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) loader.apply_line(line, "line " + std::to_string(++number));
    for (const auto& o : overrides) {
        if (o.find('=') == std::string::npos) throw ConfigError(o, "override must have the form key=value");
        loader.apply_line(o, "--set " + o);
    }
    return loader.finish();
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::string text;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        text = buf.str();
    }
    return parse_config(text, overrides);
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& [name, setter] : Loader::table()) k.push_back(name);
        return k;
    }();
    return keys;
}

}  // namespace dia
