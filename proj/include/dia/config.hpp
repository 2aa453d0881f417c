#pragma once

#include "dia/grid.hpp"
#include "dia/model.hpp"
#include "dia/simulation.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dia {

/// fixed: all-risky throughout; dynamic-pre: optimal allocation before
/// retirement only; dynamic-all: optimal allocation in both phases.
enum class SolveMode { Fixed, DynamicPre, DynamicAll };

std::string to_string(SolveMode mode);

struct RunConfig {
    ModelParams params;
    GridConfig grid;
    SolveMode mode{SolveMode::Fixed};
    int steps_per_year{24};
    int post_store_stride{12};
    int pre_store_stride{2};
    std::string output_dir{"."};

    std::size_t sim_paths{100000};
    double sim_dt{1.0 / 48};
    std::uint64_t sim_seed{20240601};
    bool sim_antithetic{true};

    AllocationMode pre_mode() const { return mode == SolveMode::Fixed ? AllocationMode::Fixed : AllocationMode::Dynamic; }
    AllocationMode post_mode() const {
        return mode == SolveMode::DynamicAll ? AllocationMode::Dynamic : AllocationMode::Fixed;
    }
    PostSolverOptions post_options() const;
    PreSolverOptions pre_options() const;
    SimConfig sim_config(double age, double w, double income) const;

    /// Re-checks every constraint; throws ConfigError naming the offending key.
    void validate() const;
};

/// Flat `key = value` text; `#` starts a comment. Later lines override
/// earlier ones, and `overrides` ("key=value") are applied last. Unknown
/// keys are rejected. market.rho follows market.r unless set explicitly.
RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {});
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Every accepted key, in documentation order.
const std::vector<std::string>& config_keys();

}  // namespace dia
