#include "dia/cli.hpp"

#include "dia/annuity.hpp"
#include "dia/csv.hpp"
#include "dia/errors.hpp"
#include "dia/policy.hpp"
#include "dia/post_solver.hpp"
#include "dia/pre_solver.hpp"
#include "dia/simulation.hpp"

#include <cmath>
#include <filesystem>
#include <memory>
#include <stdexcept>

namespace fs = std::filesystem;

namespace dia {

namespace {

class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Owns the outputs of one run so that a failure can take them all back.
class Outputs {
public:
    explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}
    ~Outputs() {
        if (done_) return;
        for (const auto& p : written_) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }

    std::unique_ptr<CsvWriter> open(const std::string& name, const std::vector<std::string>& header) {
        fs::create_directories(dir_);
        return std::make_unique<CsvWriter>(dir_ / name, header);
    }
    void commit(CsvWriter& w) {
        w.commit();
        written_.push_back(w.path());
    }
    void finish() { done_ = true; }
    const std::vector<fs::path>& written() const { return written_; }

private:
    fs::path dir_;
    std::vector<fs::path> written_;
    bool done_{false};
};

struct Context {
    const RunConfig& config;
    const CliArgs& args;
    Outputs& outputs;
    std::ostream& log;

    double start_age() const { return config.params.contract.x; }
    double retirement_age() const { return config.params.retirement_age(); }

    double age_or(double fallback) const { return args.age.value_or(fallback); }

    double required(const std::optional<double>& v, const char* flag) const {
        if (!v) throw UsageError(std::string("missing required argument ") + flag);
        return *v;
    }

    void pre_span_age(double age) const {
        if (!(age >= start_age() - 1e-9 && age <= retirement_age() + 1e-9))
            throw UsageError("--age must lie between the start age and the retirement age");
    }

    Grid2D grid() const { return build_grid(config.grid); }
};

struct Solved {
    Grid2D grid;
    ValueSurface post;
    std::optional<PreSolution> pre;
};

Solved solve(const Context& ctx, bool with_pre) {
    Solved s{ctx.grid(), {}, std::nullopt};
    s.post = solve_post(ctx.config.params, s.grid, ctx.config.post_options());
    if (with_pre) s.pre = solve_pre(ctx.config.params, s.grid, s.post, ctx.config.pre_options());
    return s;
}

void cmd_price(Context& ctx) {
    const auto& p = ctx.config.params;
    const double age = ctx.age_or(ctx.start_age());
    ctx.pre_span_age(age);
    const DIAPricer<double> pricer(p.contract, p.mortality, p.market);
    const double t = age - ctx.start_age();
    auto csv = ctx.outputs.open("price.csv", {"age", "Q", "retirement_age", "annuity_at_retirement", "a_tilde", "refund"});
    csv->field(age).field(p.contract.Q).field(ctx.retirement_age()).field(pricer.annuity_at_retirement());
    csv->field(pricer.price(t)).field(pricer.refund(t));
    csv->end_row();
    ctx.outputs.commit(*csv);
    ctx.log << "a_tilde(" << format_double(age) << ") = " << format_double(pricer.price(t)) << '\n';
}

void cmd_solve_post(Context& ctx) {
    const double age = ctx.age_or(ctx.retirement_age());
    if (!(age >= ctx.retirement_age() - 1e-9 && age <= ctx.config.params.terminal_age + 1e-9))
        throw UsageError("--age must lie between the retirement age and the terminal age");
    const Solved s = solve(ctx, false);
    const std::size_t slice = s.post.nearest_slice(age);
    const bool dynamic = !s.post.alpha.empty();
    auto csv = ctx.outputs.open("post_slice.csv", {"age", "w", "I", "J", "consumption", "alpha"});
    const double slice_age = s.post.age_of(slice);
    for (Eigen::Index q = 0; q < s.grid.nI(); ++q) {
        for (Eigen::Index k = 0; k < s.grid.core_size; ++k) {
            csv->field(slice_age).field(s.grid.w(k)).field(s.grid.I(q)).field(s.post.values[slice](k, q));
            csv->field(s.post.consumption[slice](k, q)).field(dynamic ? s.post.alpha[slice](k, q) : 1.0);
            csv->end_row();
        }
    }
    ctx.outputs.commit(*csv);
    ctx.log << "post-retirement slice at age " << format_double(slice_age) << " (" << s.grid.nw() << " x "
            << s.grid.nI() << " nodes, mode " << to_string(ctx.config.mode) << ")\n";
}

void cmd_solve_pre(Context& ctx) {
    const double age = ctx.age_or(ctx.start_age());
    ctx.pre_span_age(age);
    const Solved s = solve(ctx, true);
    const PreSolveSlice& slice = s.pre->nearest(age);
    auto csv = ctx.outputs.open("pre_slice.csv", {"age", "w", "I", "j1", "j2", "annuitize"});
    for (Eigen::Index q = 0; q < s.grid.nI(); ++q) {
        for (Eigen::Index k = 0; k < s.grid.core_size; ++k) {
            csv->field(slice.age).field(s.grid.w(k)).field(s.grid.I(q)).field(slice.j1(k, q)).field(slice.j2(k, q));
            csv->field(static_cast<bool>(slice.annuitize(k, q)));
            csv->end_row();
        }
    }
    ctx.outputs.commit(*csv);
    ctx.log << "pre-retirement slice at age " << format_double(slice.age) << ", " << s.pre->substeps
            << " explicit sub-steps per step\n";
}

void cmd_frontier(Context& ctx) {
    std::vector<double> ages;
    if (ctx.args.age) {
        ctx.pre_span_age(*ctx.args.age);
        ages.push_back(*ctx.args.age);
    } else {
        for (double a = std::ceil(ctx.start_age() - 1e-9); a <= ctx.retirement_age() + 1e-9; a += 1) ages.push_back(a);
    }
    const Solved s = solve(ctx, true);
    auto csv = ctx.outputs.open("frontier.csv", {"age", "I", "w_star", "a_tilde"});
    for (double age : ages) {
        const PolicyFrontier f = extract_frontier(*s.pre, age);
        for (Eigen::Index q = 0; q < f.I.size(); ++q) {
            csv->field(f.age).field(f.I(q)).field(f.w_star(q)).field(f.a_tilde);
            csv->end_row();
        }
        Eigen::Index present = 0;
        for (Eigen::Index q = 0; q < f.I.size(); ++q) present += f.present(q);
        ctx.log << "age " << format_double(f.age) << ": boundary at " << present << " of " << f.I.size()
                << " income levels\n";
    }
    ctx.outputs.commit(*csv);
}

void cmd_alpha_map(Context& ctx) {
    const double age = ctx.age_or(ctx.start_age());
    if (!(age >= ctx.start_age() - 1e-9 && age <= ctx.config.params.terminal_age + 1e-9))
        throw UsageError("--age must lie between the start age and the terminal age");
    const bool pre_phase = age <= ctx.retirement_age() + 1e-9;
    const Solved s = solve(ctx, pre_phase);
    auto csv = ctx.outputs.open("alpha_map.csv", {"age", "I", "w", "alpha", "annuitize"});
    if (pre_phase) {
        const PreSolveSlice& slice = s.pre->nearest(age);
        for (Eigen::Index q = 0; q < s.grid.nI(); ++q) {
            for (Eigen::Index k = 0; k < s.grid.core_size; ++k) {
                csv->field(slice.age).field(s.grid.I(q)).field(s.grid.w(k));
                csv->field(slice.alpha.size() ? slice.alpha(k, q) : 1.0).field(static_cast<bool>(slice.annuitize(k, q)));
                csv->end_row();
            }
        }
    } else {
        const std::size_t slice = s.post.nearest_slice(age);
        for (Eigen::Index q = 0; q < s.grid.nI(); ++q) {
            for (Eigen::Index k = 0; k < s.grid.core_size; ++k) {
                csv->field(s.post.age_of(slice)).field(s.grid.I(q)).field(s.grid.w(k));
                csv->field(s.post.alpha.empty() ? 1.0 : s.post.alpha[slice](k, q)).field(false);
                csv->end_row();
            }
        }
    }
    ctx.outputs.commit(*csv);
    ctx.log << "allocation map at age " << format_double(age) << '\n';
}

void cmd_recommend(Context& ctx) {
    const double age = ctx.required(ctx.args.age, "--age");
    const double w = ctx.required(ctx.args.wealth, "--wealth");
    const double income = ctx.required(ctx.args.income, "--income");
    ctx.pre_span_age(age);
    const Grid2D grid = ctx.grid();
    if (w < 0 || w > grid.w_max() || income < 0 || income > grid.I(grid.nI() - 1))
        throw UsageError("--wealth/--income outside the solved grid");
    const Solved s = solve(ctx, true);
    const PolicyFrontier f = extract_frontier(*s.pre, age);
    const Recommendation r = recommend(f, w, income);
    auto csv = ctx.outputs.open("recommend.csv", {"age", "w", "I", "annuitize", "delta_I", "cost", "w_after",
                                                   "I_after", "a_tilde"});
    csv->field(f.age).field(w).field(income).field(r.annuitize).field(r.delta_I).field(r.delta_I * r.a_tilde);
    csv->field(r.w_after).field(r.I_after).field(r.a_tilde);
    csv->end_row();
    ctx.outputs.commit(*csv);
    ctx.log << (r.annuitize ? "buy " + format_double(r.delta_I) + " of deferred income for " +
                                  format_double(r.delta_I * r.a_tilde)
                            : std::string("no purchase"))
            << '\n';
}

void cmd_simulate(Context& ctx) {
    RunConfig cfg = ctx.config;
    if (ctx.args.paths) cfg.sim_paths = *ctx.args.paths;
    if (ctx.args.seed) cfg.sim_seed = *ctx.args.seed;
    if (cfg.sim_paths < 1) throw UsageError("--paths must be at least 1");
    const double age = ctx.age_or(ctx.start_age());
    const SimConfig sim = cfg.sim_config(age, ctx.args.wealth.value_or(10.0), ctx.args.income.value_or(0.0));
    sim.validate();
    const bool pre_phase = age < ctx.retirement_age() - 1e-9;
    const Solved s = solve(ctx, pre_phase);
    const PolicyModel model(cfg.params, s.post, s.pre ? &*s.pre : nullptr);
    const std::vector<Strategy> strategies = {Strategy::Optimal, Strategy::NeverAnnuitize,
                                              Strategy::AnnuitizeAllAtStart, Strategy::FixedConsumption};
    const auto results = compare_strategies(model, strategies, sim);
    auto csv = ctx.outputs.open("simulate.csv", {"strategy", "mean_utility", "ci95", "paths", "seed"});
    for (const auto& r : results) {
        csv->field(to_string(r.strategy)).field(r.mean_utility).field(r.ci_halfwidth);
        csv->field(static_cast<std::uint64_t>(r.paths)).field(r.seed);
        csv->end_row();
        ctx.log << to_string(r.strategy) << ": " << format_double(r.mean_utility) << " +/- "
                << format_double(r.ci_halfwidth) << '\n';
    }
    ctx.outputs.commit(*csv);
    ctx.log << "solver J = " << format_double(model.solver_value(age, sim.w, sim.I)) << '\n';
}

using Command = void (*)(Context&);

const std::vector<std::pair<std::string, Command>>& commands() {
    static const std::vector<std::pair<std::string, Command>> c = {
        {"price", cmd_price},         {"solve-post", cmd_solve_post}, {"solve-pre", cmd_solve_pre},
        {"frontier", cmd_frontier},   {"alpha-map", cmd_alpha_map},   {"recommend", cmd_recommend},
        {"simulate", cmd_simulate},
    };
    return c;
}

}  // namespace

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& [name, fn] : commands()) n.push_back(name);
        return n;
    }();
    return names;
}

int run_subcommand(const std::string& name, const RunConfig& config, const CliArgs& args, std::ostream& log,
                   std::ostream& err) {
    Command command = nullptr;
    for (const auto& [n, fn] : commands())
        if (n == name) command = fn;
    if (!command) {
        err << "error: unknown subcommand '" << name << "'\n";
        return kExitUsage;
    }
    Outputs outputs(config.output_dir);
    try {
        config.validate();
        Context ctx{config, args, outputs, log};
        command(ctx);
        outputs.finish();
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::out_of_range& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
}

}  // namespace dia
