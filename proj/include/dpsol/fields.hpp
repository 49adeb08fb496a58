#pragma once

// q(y,t), u(y,t) and the hodograph map x(y,t) of the one- and two-mode
// solutions, plus parametric frame sampling at fixed t.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <sstream>
#include <thread>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dpsol/error.hpp"
#include "dpsol/exp_poly.hpp"
#include "dpsol/mode_params.hpp"
#include "dpsol/tau.hpp"

namespace dpsol {

template <class Real = double>
struct FieldSet {
    Model<Real> model;
    ExpPoly<Real> f;       // tau function, (prod a_j^2) * f_tilde
    ExpPoly<Real> f_tilde; // reduced tau function
    ExpPoly<Real> g1;
    ExpPoly<Real> g2;
    ExpPoly<Real> g;       // g1 * g2
    ExpPoly<Real> h;
    RationalExp<Real> q;   // kappa g / f_tilde
    RationalExp<Real> u;   // kappa^3 h / g
    RationalExp<Real> x_integrand; // 1/q - 1/kappa = (f_tilde - g) / (kappa g)

    Real kappa() const { return model.kappa; }
    std::size_t size() const { return model.size(); }
};

/// Closed-form coefficient tables written for the all-loop sign pattern;
/// smooth modes are obtained by E_j -> -E_j.
template <class Real>
struct ClosedFormTables {
    ExpPoly<Real> g1;
    ExpPoly<Real> g2;
    ExpPoly<Real> h;
};

template <class Real>
ClosedFormTables<Real> closed_form_tables(const Model<Real>& model)
{
    const auto& md = model.modes;
    const Real kap = model.kappa;
    auto kk = [&](std::size_t j) { return kap * md[j].k; };
    // Coefficients of e^{xi_j} in g1, g2 (without the leading minus sign) and in h.
    auto A = [&](std::size_t j) { return (Real(2) - kk(j)) / (Real(2) * md[j].a * (Real(1) + kk(j))); };
    auto B = [&](std::size_t j) { return (Real(2) + kk(j)) / (Real(2) * md[j].a * (Real(1) - kk(j))); };
    auto H = [&](std::size_t j) {
        const Real s = Real(1) - kk(j) * kk(j);
        return Real(9) * kk(j) * kk(j) / (md[j].a * s * s);
    };

    ExpPoly<Real> g1(model.phases), g2(model.phases), h(model.phases);
    if (md.size() == 1) {
        g1.add_term({0}, Real(1));
        g1.add_term({1}, -A(0));
        g2.add_term({0}, Real(1));
        g2.add_term({1}, -B(0));
        h.add_term({1}, -H(0));
    } else {
        const auto [delta, nu] = delta_nu<Real>(kap, md[0].k, md[1].k);
        g1.add_term({0, 0}, delta);
        g1.add_term({1, 0}, -A(0));
        g1.add_term({0, 1}, -A(1));
        g1.add_term({1, 1}, A(0) * A(1));
        g2.add_term({0, 0}, delta);
        g2.add_term({1, 0}, -B(0));
        g2.add_term({0, 1}, -B(1));
        g2.add_term({1, 1}, B(0) * B(1));

        const Real k1 = md[0].k, k2 = md[1].k;
        const Real k1s = k1 * k1, k2s = k2 * k2, kap2 = kap * kap;
        const Real s1 = Real(1) - kap2 * k1s, s2 = Real(1) - kap2 * k2s;
        const Real poly = kap2 * kap2 * kap2 * k1s * k2s * (k1s + k2s) - Real(4) * kap2 * kap2 * k1s * k2s
                          - Real(2) * kap2 * (k1s + k2s) + Real(6);
        const Real cross = Real(-9) * kap2 * (k1 - k2) * (k1 - k2) * poly
                           / (md[0].a * md[1].a * s1 * s1 * s2 * s2 * (kap2 * (k1s + k1 * k2 + k2s) - Real(3)));
        h.add_term({1, 0}, -delta * H(0));
        h.add_term({0, 1}, -delta * H(1));
        h.add_term({1, 1}, cross);
        h.add_term({1, 2}, -H(0));
        h.add_term({2, 1}, -H(1));
    }
    auto signs = [&](const MultiIndex& m, Real c) { return c * detail::sign_factor(m, md); };
    return {g1.map_coefficients(signs), g2.map_coefficients(signs), h.map_coefficients(signs)};
}

template <class Real>
FieldSet<Real> make_fields(Model<Real> model, ExpPoly<Real> f_tilde, ExpPoly<Real> g1, ExpPoly<Real> g2,
                           ExpPoly<Real> h)
{
    const Real kap = model.kappa;
    auto f = amplitude_product_squared(model) * f_tilde;
    auto g = g1 * g2;
    RationalExp<Real> q(kap * g, f_tilde);
    RationalExp<Real> u(kap * kap * kap * h, g);
    // The constant terms of f_tilde and g agree analytically (delta^2, or 1).
    auto diff = f_tilde - g;
    diff.set_coefficient(MultiIndex(model.size(), 0), Real(0));
    RationalExp<Real> integrand(diff, kap * g);
    return FieldSet<Real>{std::move(model), std::move(f), std::move(f_tilde), std::move(g1), std::move(g2),
                          std::move(g), std::move(h), std::move(q), std::move(u), std::move(integrand)};
}

template <class Real>
FieldSet<Real> assemble_fields(const Model<Real>& model)
{
    auto tables = closed_form_tables(model);
    return make_fields(model, reduced_tau(model), std::move(tables.g1), std::move(tables.g2),
                       std::move(tables.h));
}

template <class Real = double>
FieldSet<Real> assemble_fields(const SolitonSpec& spec)
{
    return assemble_fields(Model<Real>(spec));
}

/// u through the q-route: -q (ln q)_ty + q^3 - kappa^3, as one exact quotient.
template <class Real>
RationalExp<Real> u_from_q(const RationalExp<Real>& q, Real kappa)
{
    const auto L = rational_mixed_log_derivative(q);
    const auto k3 = kappa * kappa * kappa;
    // -q L = -(qn Ln) / (qd Ld);  q^3 - k^3 = (qn^3 - k^3 qd^3) / qd^3,
    // brought over qd Ld using Ld = qn^2 qd^2.
    const auto& qn = q.num();
    const auto& qd = q.den();
    auto num = -(qn * L.num()) + (qn * qn * qn - k3 * (qd * qd * qd)) * (qn * qn);
    return RationalExp<Real>(std::move(num), qd * L.den());
}

template <class Real>
RationalExp<Real> u_pipeline(const FieldSet<Real>& fields)
{
    return u_from_q(fields.q, fields.kappa());
}

namespace detail {

template <class Real>
Real log_ratio(const ExpPoly<Real>& num, const ExpPoly<Real>& den, Real y, Real t)
{
    const auto n = num.eval_scaled(y, t);
    const auto d = den.eval_scaled(y, t);
    if (d.mantissa == Real(0) || !(n.mantissa / d.mantissa > Real(0))) {
        std::ostringstream os;
        os << "map argument g1/g2 is not positive at y=" << static_cast<double>(y)
           << " t=" << static_cast<double>(t);
        throw Error(ErrorKind::MapSingularity, os.str());
    }
    return std::log(n.mantissa / d.mantissa) + (n.log_scale - d.log_scale);
}

} // namespace detail

/// alpha of the one-loop coordinate map.
template <class Real>
Real one_loop_alpha(Real a)
{
    const Real r = (Real(2) * a - Real(1)) * (a + Real(1)) / ((Real(2) * a + Real(1)) * (a - Real(1)));
    if (!(r > Real(0)))
        throw Error(ErrorKind::MapSingularity, "alpha^2 is not positive");
    return std::sqrt(r);
}

/// Closed-form hodograph map.
/// Two modes: y/kappa + ln(g1/g2) + d.
/// One loop mode: y/kappa + ln[(1+al+(1-al)e^xi) / (1-al+(1+al)e^xi)] + d.
/// One smooth mode: same form as two modes.
template <class Real>
Real x_closed(const FieldSet<Real>& fields, Real y, Real t)
{
    const auto& model = fields.model;
    const Real base = y / model.kappa + Real(model.spec.d);
    if (model.size() == 1 && model.modes[0].epsilon == Sign::Loop) {
        const Real al = one_loop_alpha(model.modes[0].a);
        const Real xi = model.phases->xi(0, y, t);
        Real ratio;
        if (xi <= Real(0)) {
            const Real e = std::exp(xi);
            ratio = (Real(1) + al + (Real(1) - al) * e) / (Real(1) - al + (Real(1) + al) * e);
        } else {
            const Real e = std::exp(-xi);
            ratio = ((Real(1) + al) * e + Real(1) - al) / ((Real(1) - al) * e + Real(1) + al);
        }
        if (!(ratio > Real(0)))
            throw Error(ErrorKind::MapSingularity, "one-loop map argument is not positive");
        return base + std::log(ratio);
    }
    return base + detail::log_ratio(fields.g1, fields.g2, y, t);
}

/// Lower integration limit where every xi_j <= -cutoff.
template <class Real>
Real quadrature_lower_limit(const FieldSet<Real>& fields, Real t, Real cutoff)
{
    const auto& ph = *fields.model.phases;
    Real lo = std::numeric_limits<Real>::infinity();
    for (std::size_t j = 0; j < ph.size(); ++j)
        lo = std::min(lo, ph.y0[j] - ph.c[j] * t - cutoff / ph.k[j]);
    return lo;
}

/// Throws SingularIntegrand if g = g1 g2 changes sign on [lo, hi].
template <class Real>
void scan_for_zero_of_q(const FieldSet<Real>& fields, Real lo, Real hi, Real t, std::size_t n = 512)
{
    if (!(hi > lo))
        return;
    int prev = 0;
    for (std::size_t i = 0; i <= n; ++i) {
        const Real y = lo + (hi - lo) * Real(i) / Real(n);
        const auto v = fields.g.eval_scaled(y, t);
        const int s = (v.mantissa > Real(0)) - (v.mantissa < Real(0));
        if (s == 0 || (prev != 0 && s != prev)) {
            std::ostringstream os;
            os << "q vanishes near y=" << static_cast<double>(y) << " t=" << static_cast<double>(t);
            throw Error(ErrorKind::SingularIntegrand, os.str());
        }
        prev = s;
    }
}

/// y/kappa + int_{-inf}^{y} (1/q - 1/kappa) dy' + d by adaptive Gauss-Kronrod;
/// the integrand is dropped where every xi_j <= -cutoff.
template <class Real>
Real x_quadrature(const FieldSet<Real>& fields, Real y, Real t, Real cutoff = Real(40))
{
    const Real base = y / fields.kappa() + Real(fields.model.spec.d);
    const Real lo = quadrature_lower_limit(fields, t, cutoff);
    if (!(y > lo))
        return base;
    scan_for_zero_of_q(fields, lo, y, t);
    auto integrand = [&](Real s) { return fields.x_integrand(s, t); };
    using boost::math::quadrature::gauss_kronrod;
    const Real tol = std::max(Real(1e-14), std::numeric_limits<Real>::epsilon() * Real(64));
    // A single rule suffices when the whole integral is below rounding level;
    // relative refinement would then recurse to full depth chasing noise.
    Real err = 0;
    Real integral = gauss_kronrod<Real, 31>::integrate(integrand, lo, y, 0, tol, &err);
    if (err > tol)
        integral = gauss_kronrod<Real, 31>::integrate(integrand, lo, y, 20, tol);
    return base + integral;
}

template <class Real = double>
struct Sample {
    Real y;
    Real x;
    Real u;
    Real q;
};

template <class Real = double>
struct ParametricCurve {
    Real t = 0;
    std::vector<Sample<Real>> samples;
    std::size_t sign_changes = 0;
    std::size_t loop_count = 0;
    bool singular = false;
};

template <class Real>
std::size_t count_sign_changes(const std::vector<Sample<Real>>& s)
{
    std::size_t n = 0;
    for (std::size_t i = 1; i < s.size(); ++i)
        n += (s[i - 1].q < Real(0)) != (s[i].q < Real(0));
    return n;
}

/// n samples uniform in y on [y_min, y_max]; chunks may run on parallel workers,
/// results are merged in index order.
template <class Real>
ParametricCurve<Real> sample_frame(const FieldSet<Real>& fields, Real t, Real y_min, Real y_max, std::size_t n,
                                   unsigned workers = 1)
{
    if (n < 2)
        throw Error(ErrorKind::InvalidArgument, "a frame needs at least two samples");
    if (!(y_min < y_max))
        throw Error(ErrorKind::InvalidArgument, "y_min must be below y_max");
    ParametricCurve<Real> curve;
    curve.t = t;
    curve.samples.resize(n);
    std::vector<char> near_zero(n, 0);
    const Real step = (y_max - y_min) / Real(n - 1);
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const Real y = i + 1 == n ? y_max : y_min + step * Real(i);
            const auto gv = fields.g.eval_scaled(y, t);
            near_zero[i] = std::abs(gv.mantissa) < Real(1e-12) * gv.magnitude;
            curve.samples[i] = Sample<Real>{y, x_closed(fields, y, t), fields.u(y, t), fields.q(y, t)};
        }
    };
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
    if (workers == 1) {
        work(0, n);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        const std::size_t chunk = (n + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t b = w * chunk, e = std::min(n, b + chunk);
            pool.emplace_back([&, w, b, e] {
                try {
                    work(b, e);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& th : pool)
            th.join();
        for (auto& err : errors)
            if (err)
                std::rethrow_exception(err);
    }
    curve.singular = std::any_of(near_zero.begin(), near_zero.end(), [](char c) { return c != 0; });
    curve.sign_changes = count_sign_changes(curve.samples);
    curve.loop_count = curve.sign_changes / 2;
    return curve;
}

template <class Real = double>
struct Feature {
    Real y;
    Real x;
    Real u;
};

namespace detail {

template <class Real, class F>
Real golden_section_min(F&& f, Real lo, Real hi, Real tol)
{
    const Real invphi = (std::sqrt(Real(5)) - Real(1)) / Real(2);
    Real a = lo, b = hi;
    Real c = b - invphi * (b - a), d = a + invphi * (b - a);
    Real fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    return (a + b) / Real(2);
}

// direction = +1 finds troughs (minima of u), -1 finds crests.
template <class Real>
std::vector<Feature<Real>> extrema(const FieldSet<Real>& fields, const ParametricCurve<Real>& curve, int direction)
{
    std::vector<Feature<Real>> out;
    const auto& s = curve.samples;
    if (s.size() < 3)
        return out;
    Real peak = 0;
    for (const auto& p : s)
        peak = std::max(peak, std::abs(p.u));
    if (peak == Real(0))
        return out;
    const Real plateau = Real(1e-6) * peak;
    const Real t = curve.t;
    auto val = [&](Real y) { return Real(direction) * fields.u(y, t); };
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        const Real v = Real(direction) * s[i].u;
        if (v < Real(direction) * s[i - 1].u && v <= Real(direction) * s[i + 1].u && v < -plateau) {
            const Real y = golden_section_min(val, s[i - 1].y, s[i + 1].y, Real(1e-10));
            out.push_back(Feature<Real>{y, x_closed(fields, y, t), fields.u(y, t)});
        }
    }
    return out;
}

} // namespace detail

/// Interior local minima of u along y with u < 0, refined by golden section.
template <class Real>
std::vector<Feature<Real>> trough_positions(const FieldSet<Real>& fields, const ParametricCurve<Real>& curve)
{
    return detail::extrema(fields, curve, +1);
}

/// Interior local maxima of u along y with u > 0.
template <class Real>
std::vector<Feature<Real>> crest_positions(const FieldSet<Real>& fields, const ParametricCurve<Real>& curve)
{
    return detail::extrema(fields, curve, -1);
}

template <class Real = double>
struct Interval {
    Real lo;
    Real hi;
    bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
    Real width() const { return hi - lo; }
};

/// x-extent of every backward-running stretch (q < 0) of the frame.
template <class Real>
std::vector<Interval<Real>> loop_x_extents(const ParametricCurve<Real>& curve)
{
    std::vector<Interval<Real>> out;
    bool inside = false;
    Interval<Real> cur{0, 0};
    for (const auto& p : curve.samples) {
        if (p.q < Real(0)) {
            if (!inside) {
                cur = {p.x, p.x};
                inside = true;
            }
            cur.lo = std::min(cur.lo, p.x);
            cur.hi = std::max(cur.hi, p.x);
        } else if (inside) {
            out.push_back(cur);
            inside = false;
        }
    }
    if (inside)
        out.push_back(cur);
    return out;
}

} // namespace dpsol
