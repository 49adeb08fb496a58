#pragma once

// The tau function f = det A built three independent ways: numeric
// determinant of the 2N x 2N matrix, exact cofactor expansion over
// exponential polynomials, and the hard-coded closed-form coefficient tables.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <type_traits>
#include <vector>

#include "dpsol/error.hpp"
#include "dpsol/exp_poly.hpp"
#include "dpsol/mode_params.hpp"

namespace dpsol {

/// Validated spec plus its derived per-mode quantities and shared phases.
template <class Real = double>
struct Model {
    SolitonSpec spec;
    Real kappa;
    std::vector<DerivedMode<Real>> modes;
    PhasesPtr<Real> phases;

    explicit Model(SolitonSpec s)
        : spec(std::move(s)), kappa(spec.kappa), modes(derive<Real>(spec)), phases(make_phases(modes))
    {
    }

    std::size_t size() const { return modes.size(); }

    MultiIndex index(int m1) const { return MultiIndex{m1}; }
    MultiIndex index(int m1, int m2) const { return MultiIndex{m1, m2}; }
};

template <class Real = double>
struct TwoModeConstants {
    Real delta;
    Real nu;
};

template <class Real = double>
TwoModeConstants<Real> delta_nu(Real kappa, Real k1, Real k2)
{
    const Real kap2 = kappa * kappa;
    const Real sum = k1 + k2;
    const Real denom = sum * sum * (kap2 * (k1 * k1 + k1 * k2 + k2 * k2) - Real(3));
    if (denom == Real(0))
        throw Error(ErrorKind::DegenerateDelta, "kappa^2 (k1^2 + k1 k2 + k2^2) = 3");
    const Real diff = k1 - k2;
    const Real delta = diff * diff * (kap2 * (k1 * k1 - k1 * k2 + k2 * k2) - Real(3)) / denom;
    const Real k1s = k1 * k1;
    const Real k2s = k2 * k2;
    const Real nu = ((Real(2) * k1s * k1s - k1s * k2s + Real(2) * k2s * k2s) * kap2 - Real(6) * (k1s + k2s)) / denom;
    return {delta, nu};
}

template <class Real = double>
class TauMatrix {
public:
    using Entry = ExpPoly<std::complex<Real>>;

    TauMatrix(std::size_t n, std::vector<Entry> entries) : n_(n), entries_(std::move(entries)) {}

    std::size_t size() const { return n_; }
    const Entry& operator()(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }

private:
    std::size_t n_;
    std::vector<Entry> entries_;
};

namespace detail {

// p~ and q~ for matrix row r: rows 2j, 2j+1 belong to mode j.
template <class Real>
std::pair<std::complex<Real>, std::complex<Real>> tilde_pq(const std::vector<DerivedMode<Real>>& modes,
                                                           std::size_t r)
{
    const auto& m = modes[r / 2];
    if (r % 2 == 0)
        return {m.q, -m.p};
    return {m.p, -m.q};
}

template <class Real>
Real sign_factor(const MultiIndex& m, const std::vector<DerivedMode<Real>>& modes)
{
    // E_j -> (-epsilon_j) E_j relative to the all-loop tables.
    Real s = 1;
    for (std::size_t j = 0; j < m.size(); ++j)
        if (m[j] % 2 != 0 && modes[j].epsilon == Sign::Smooth)
            s = -s;
    return s;
}

template <class T>
ExpPoly<T> cofactor_det(const std::vector<const ExpPoly<T>*>& a, std::size_t n, std::vector<std::size_t>& cols,
                        std::size_t row)
{
    const auto& phases = a.front()->phases();
    if (row == n)
        return ExpPoly<T>::constant(phases, T(1));
    ExpPoly<T> out(phases);
    int sign = 1;
    for (std::size_t c = 0; c < cols.size(); ++c) {
        const std::size_t col = cols[c];
        const auto& entry = *a[row * n + col];
        if (!entry.is_zero()) {
            cols.erase(cols.begin() + static_cast<std::ptrdiff_t>(c));
            auto minor = cofactor_det(a, n, cols, row + 1);
            cols.insert(cols.begin() + static_cast<std::ptrdiff_t>(c), col);
            auto term = entry * minor;
            if (sign < 0)
                out -= term;
            else
                out += term;
        }
        sign = -sign;
    }
    return out;
}

} // namespace detail

template <class Real>
TauMatrix<Real> build_matrix(const Model<Real>& model)
{
    using C = std::complex<Real>;
    const auto& modes = model.modes;
    const std::size_t n = 2 * modes.size();
    std::vector<ExpPoly<C>> entries;
    entries.reserve(n * n);
    for (std::size_t r = 0; r < n; ++r) {
        const auto [pr, qr] = detail::tilde_pq(modes, r);
        for (std::size_t c = 0; c < n; ++c) {
            if (r == c) {
                const auto& m = modes[r / 2];
                ExpPoly<C> e = ExpPoly<C>::constant(model.phases, C(1));
                MultiIndex idx(modes.size(), 0);
                idx[r / 2] = 1;
                e.add_term(idx, C(Real(to_int(m.epsilon)) * m.a));
                entries.push_back(std::move(e));
            } else {
                const auto qc = detail::tilde_pq(modes, c).second;
                entries.push_back(ExpPoly<C>::constant(model.phases, (pr - qr) / (pr - qc)));
            }
        }
    }
    return TauMatrix<Real>(n, std::move(entries));
}

template <class Real = double>
TauMatrix<Real> build_matrix(const SolitonSpec& spec)
{
    return build_matrix(Model<Real>(spec));
}

/// Exact cofactor expansion of det A; imaginary residue is checked and dropped.
/// The constant term is (prod a_j delta)^2, a small number formed by cancellation
/// of O(1) products, so double requests are expanded in long double.
template <class Real>
ExpPoly<Real> det_symbolic(const Model<Real>& model)
{
    if constexpr (std::is_same_v<Real, double>) {
        const Model<long double> wide(model.spec);
        const auto expanded = det_symbolic(wide);
        ExpPoly<Real> out(model.phases);
        for (const auto& [m, c] : expanded.terms())
            out.add_term(m, static_cast<Real>(c));
        return out;
    } else {
        const auto a = build_matrix(model);
        const std::size_t n = a.size();
        std::vector<const ExpPoly<std::complex<Real>>*> ptrs;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                ptrs.push_back(&a(i, j));
        std::vector<std::size_t> cols(n);
        for (std::size_t j = 0; j < n; ++j)
            cols[j] = j;
        return real_part(detail::cofactor_det(ptrs, n, cols, 0));
    }
}

template <class Real = double>
ExpPoly<Real> det_symbolic(const SolitonSpec& spec)
{
    return det_symbolic(Model<Real>(spec));
}

/// det A at (y, t) by partial-pivot elimination on row-scaled complex
/// entries. The scale factors are returned as log_scale so that frames far
/// from the interaction region do not overflow.
template <class Real>
ScaledValue<Real> det_numeric_scaled(const Model<Real>& model, Real y, Real t)
{
    using C = std::complex<Real>;
    const auto& modes = model.modes;
    const std::size_t n = 2 * modes.size();
    std::vector<C> m(n * n);
    Real log_scale = 0;
    for (std::size_t r = 0; r < n; ++r) {
        const auto& mode = modes[r / 2];
        const Real growth = model.phases->xi(r / 2, y, t) + std::log(mode.a);
        const Real row_log = std::max(Real(0), growth);
        const Real inv = std::exp(-row_log);
        log_scale += row_log;
        const auto [pr, qr] = detail::tilde_pq(modes, r);
        for (std::size_t c = 0; c < n; ++c) {
            if (r == c) {
                m[r * n + c] = C(inv + Real(to_int(mode.epsilon)) * std::exp(growth - row_log));
            } else {
                const auto qc = detail::tilde_pq(modes, c).second;
                m[r * n + c] = (pr - qr) / (pr - qc) * inv;
            }
        }
    }
    Real hadamard = 1;
    for (std::size_t r = 0; r < n; ++r) {
        Real row = 0;
        for (std::size_t c = 0; c < n; ++c)
            row += std::norm(m[r * n + c]);
        hadamard *= std::sqrt(row);
    }
    C det(1);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(m[r * n + col]) > std::abs(m[piv * n + col]))
                piv = r;
        if (m[piv * n + col] == C(0)) {
            det = C(0);
            break;
        }
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c)
                std::swap(m[piv * n + c], m[col * n + c]);
            det = -det;
        }
        const C pivot = m[col * n + col];
        det *= pivot;
        for (std::size_t r = col + 1; r < n; ++r) {
            const C factor = m[r * n + col] / pivot;
            for (std::size_t c = col; c < n; ++c)
                m[r * n + c] -= factor * m[col * n + c];
        }
    }
    if (std::abs(det.imag()) > Real(1e-10) * hadamard)
        throw Error(ErrorKind::ComplexResidue, "numeric determinant has a non-negligible imaginary part");
    return ScaledValue<Real>{det.real(), hadamard, log_scale};
}

template <class Real = double>
Real det_numeric(const SolitonSpec& spec, Real y, Real t)
{
    return det_numeric_scaled(Model<Real>(spec), y, t).value();
}

/// f / prod(a_j^2): the bracketed polynomial of the closed forms.
template <class Real>
ExpPoly<Real> reduced_tau(const Model<Real>& model)
{
    const auto& md = model.modes;
    ExpPoly<Real> f(model.phases);
    if (md.size() == 1) {
        const Real a = md[0].a;
        f.add_term({0}, Real(1));
        f.add_term({1}, Real(-2) / a);
        f.add_term({2}, Real(1));
    } else {
        const Real a1 = md[0].a;
        const Real a2 = md[1].a;
        const auto [delta, nu] = delta_nu<Real>(model.kappa, md[0].k, md[1].k);
        f.add_term({0, 0}, delta * delta);
        f.add_term({1, 0}, Real(-2) * delta / a1);
        f.add_term({0, 1}, Real(-2) * delta / a2);
        f.add_term({2, 0}, Real(1));
        f.add_term({0, 2}, Real(1));
        f.add_term({1, 1}, Real(2) * nu / (a1 * a2));
        f.add_term({2, 1}, Real(-2) / a2);
        f.add_term({1, 2}, Real(-2) / a1);
        f.add_term({2, 2}, Real(1));
    }
    return f.map_coefficients([&](const MultiIndex& m, Real c) { return c * detail::sign_factor(m, md); });
}

template <class Real>
Real amplitude_product_squared(const Model<Real>& model)
{
    Real s = 1;
    for (const auto& m : model.modes)
        s *= m.a * m.a;
    return s;
}

template <class Real>
ExpPoly<Real> closed_form_tau(const Model<Real>& model)
{
    return amplitude_product_squared(model) * reduced_tau(model);
}

template <class Real = double>
ExpPoly<Real> closed_form_tau(const SolitonSpec& spec)
{
    return closed_form_tau(Model<Real>(spec));
}

} // namespace dpsol
