#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "dpsol/scenario.hpp"

namespace testing {

inline dpsol::SolitonSpec fig1() { return dpsol::presets::fig1().spec; }
inline dpsol::SolitonSpec fig2() { return dpsol::presets::fig2().spec; }
inline dpsol::SolitonSpec fig3() { return dpsol::presets::fig3().spec; }
inline dpsol::SolitonSpec fig4() { return dpsol::presets::fig4().spec; }
inline dpsol::SolitonSpec fig5() { return dpsol::presets::fig5().spec; }

inline std::vector<dpsol::ScenarioConfig> figures() { return dpsol::resolve_preset("all-figures"); }

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

// Admissible random specs: loop modes with kappa k in (2.2, 6), smooth modes
// with kappa k in (0.15, 0.85), wavenumbers kept apart so delta is not tiny.
class SpecGen {
public:
    explicit SpecGen(std::uint64_t seed) : rng_(seed) {}

    dpsol::ModeSpec mode(double kappa, dpsol::Sign s)
    {
        const double kk = s == dpsol::Sign::Loop ? uni(2.2, 6.0) : uni(0.15, 0.85);
        return {kk / kappa, s, uni(-3.0, 3.0)};
    }

    dpsol::SolitonSpec operator()()
    {
        using dpsol::Sign;
        dpsol::SolitonSpec s;
        s.kappa = uni(0.5, 2.5);
        s.d = uni(-1.0, 1.0);
        const int pattern = std::uniform_int_distribution<int>(0, 4)(rng_);
        const Sign first = pattern == 1 || pattern == 4 ? Sign::Smooth : Sign::Loop;
        s.modes.push_back(mode(s.kappa, first));
        if (pattern >= 2) {
            const Sign second = pattern == 2 ? Sign::Loop : Sign::Smooth;
            dpsol::ModeSpec m;
            do {
                m = mode(s.kappa, second);
            } while (std::abs(m.k - s.modes[0].k) * s.kappa < 0.2);
            s.modes.push_back(m);
        }
        return s;
    }

    double uni(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

private:
    std::mt19937_64 rng_;
};

template <class F>
dpsol::ErrorKind error_kind_of(F&& f)
{
    try {
        f();
    } catch (const dpsol::Error& e) {
        return e.kind();
    }
    FAIL("expected a dpsol::Error");
    return dpsol::ErrorKind::InvalidArgument;
}

} // namespace testing
