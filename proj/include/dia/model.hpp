#pragma once

#include "dia/annuity.hpp"
#include "dia/market.hpp"
#include "dia/mortality.hpp"

namespace dia {

/// Asset-allocation treatment in a solve phase: all-risky (`Fixed`) or the
/// clamped first-order optimum (`Dynamic`).
enum class AllocationMode { Fixed, Dynamic };

/// Everything the solvers need to know about the investor and the product.
struct ModelParams {
    MortalityModel<double> mortality{};
    MarketModel<double> market{};
    Preferences<double> preferences{};
    DIAContract<double> contract{};
    double terminal_age{120};

    void validate() const {
        mortality.validate();
        market.validate();
        preferences.validate();
        contract.validate();
        if (!(terminal_age > contract.retirement_age()))
            throw std::invalid_argument("model: terminal age must exceed retirement age");
    }

    double retirement_age() const { return contract.retirement_age(); }
};

}  // namespace dia
