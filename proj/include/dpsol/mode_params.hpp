#pragma once

// Physical parameters of the one- and two-mode solutions and the per-mode
// quantities derived from them (velocity, amplitude coefficient, p and q).

#include <cmath>
#include <complex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dpsol/error.hpp"

namespace dpsol {

/// Sign of the diagonal exponential in the tau matrix:
/// +1 gives 1 + a e^xi (smooth), -1 gives 1 - a e^xi (loop).
enum class Sign : int { Loop = -1, Smooth = +1 };

inline int to_int(Sign s) { return static_cast<int>(s); }

struct ModeSpec {
    double k = 0.0;
    Sign epsilon = Sign::Loop;
    double y0 = 0.0;

    bool operator==(const ModeSpec&) const = default;
};

struct SolitonSpec {
    double kappa = 1.0;
    std::vector<ModeSpec> modes;
    double d = 0.0;

    std::size_t size() const { return modes.size(); }
    bool operator==(const SolitonSpec&) const = default;
};

enum class Regime { Smooth, Loop };

inline const char* to_string(Regime r) { return r == Regime::Loop ? "Loop" : "Smooth"; }

template <class Real = double>
struct DerivedMode {
    Real k;
    Real c;
    Real a;
    std::complex<Real> p;
    std::complex<Real> q;
    Real y0;
    Sign epsilon;
};

/// 3 kappa^4 / (kappa^2 k^2 - 1).
template <class Real = double>
Real velocity(Real kappa, Real k)
{
    const Real kk = kappa * k;
    const Real denom = kk * kk - Real(1);
    if (denom == Real(0))
        throw Error(ErrorKind::VelocityPole, "kappa*k = 1");
    return Real(3) * kappa * kappa * kappa * kappa / denom;
}

template <class Real = double>
Real coefficient_a(Real kappa, Real k)
{
    const Real kk = kappa * k;
    if (!(kk < Real(1) || kk > Real(2))) {
        std::ostringstream os;
        os << "kappa*k = " << static_cast<double>(kk) << " lies in [1, 2]";
        throw Error(ErrorKind::ImaginaryCoefficient, os.str());
    }
    const Real k2 = kk * kk;
    return std::sqrt((Real(1) - k2 / Real(4)) / (Real(1) - k2));
}

/// p and q of a mode. For kappa*k > 2 they form a complex-conjugate pair.
template <class Real = double>
std::pair<std::complex<Real>, std::complex<Real>> amplitude_pq(Real kappa, Real k)
{
    using C = std::complex<Real>;
    const Real radicand = (Real(1) - kappa * kappa * k * k / Real(4)) / Real(3);
    const C root = radicand >= Real(0) ? C(std::sqrt(radicand), Real(0))
                                       : C(Real(0), std::sqrt(-radicand));
    const C shift = root / kappa;
    const Real half = k / Real(2);
    return {C(half) + shift, C(half) - shift};
}

/// Total on kappa > 0, k > 0: returns a regime or throws InvalidRegime / VelocityPole.
inline Regime classify_mode(double kappa, const ModeSpec& mode)
{
    if (!(kappa > 0.0) || !std::isfinite(kappa))
        throw Error(ErrorKind::InvalidArgument, "kappa must be positive and finite");
    if (!(mode.k > 0.0) || !std::isfinite(mode.k))
        throw Error(ErrorKind::InvalidArgument, "k must be positive and finite");
    const double kk = kappa * mode.k;
    if (kk == 1.0)
        throw Error(ErrorKind::VelocityPole, "kappa*k = 1");
    std::ostringstream os;
    os << "kappa*k = " << kk;
    if (mode.epsilon == Sign::Loop) {
        if (kk > 2.0)
            return Regime::Loop;
        os << " but a loop mode needs kappa*k > 2";
    } else {
        if (kk < 1.0)
            return Regime::Smooth;
        os << " but a smooth mode needs kappa*k < 1";
    }
    throw Error(ErrorKind::InvalidRegime, os.str());
}

/// Throws on the first violated invariant of a SolitonSpec.
inline void validate(const SolitonSpec& spec)
{
    if (!(spec.kappa > 0.0) || !std::isfinite(spec.kappa))
        throw Error(ErrorKind::InvalidArgument, "kappa must be positive and finite");
    if (spec.modes.empty() || spec.modes.size() > 2)
        throw Error(ErrorKind::InvalidArgument, "one or two modes are supported");
    if (!std::isfinite(spec.d))
        throw Error(ErrorKind::InvalidArgument, "d must be finite");
    for (const auto& m : spec.modes) {
        if (!std::isfinite(m.y0))
            throw Error(ErrorKind::InvalidArgument, "y0 must be finite");
        classify_mode(spec.kappa, m);
    }
    // delta carries (k1 - k2)^2; equal wavenumbers collapse the tau function.
    if (spec.modes.size() == 2 && spec.modes[0].k == spec.modes[1].k)
        throw Error(ErrorKind::DegenerateModes, "two modes share the same wavenumber");
}

template <class Real = double>
DerivedMode<Real> derive_mode(double kappa, const ModeSpec& mode)
{
    classify_mode(kappa, mode);
    const Real kap = kappa;
    const Real k = mode.k;
    auto [p, q] = amplitude_pq<Real>(kap, k);
    return DerivedMode<Real>{k, velocity<Real>(kap, k), coefficient_a<Real>(kap, k), p, q,
                             Real(mode.y0), mode.epsilon};
}

template <class Real = double>
std::vector<DerivedMode<Real>> derive(const SolitonSpec& spec)
{
    validate(spec);
    std::vector<DerivedMode<Real>> out;
    out.reserve(spec.modes.size());
    for (const auto& m : spec.modes)
        out.push_back(derive_mode<Real>(spec.kappa, m));
    return out;
}

inline std::size_t loop_mode_count(const SolitonSpec& spec)
{
    std::size_t n = 0;
    for (const auto& m : spec.modes)
        n += classify_mode(spec.kappa, m) == Regime::Loop;
    return n;
}

} // namespace dpsol
