#pragma once

// Sparse exponential polynomials over the phase variables
//   xi_j(y, t) = k_j (y + c_j t - y0_j)
// i.e. finite sums  sum_m coeff_m * exp(sum_j m_j xi_j)  with integer
// multi-indices m. The set is closed under +, *, d/dy and d/dt, so every
// field of the solution family is an exact quotient of two such sums.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <type_traits>
#include <utility>
#include <vector>

#include "dpsol/error.hpp"
#include "dpsol/mode_params.hpp"

namespace dpsol {

template <class T>
struct real_of {
    using type = T;
};
template <class R>
struct real_of<std::complex<R>> {
    using type = R;
};
template <class T>
using real_t = typename real_of<T>::type;

template <class Real = double>
struct PhaseSet {
    std::vector<Real> k;
    std::vector<Real> c;
    std::vector<Real> y0;

    std::size_t size() const { return k.size(); }
    Real xi(std::size_t j, Real y, Real t) const { return k[j] * (y + c[j] * t - y0[j]); }
    bool operator==(const PhaseSet&) const = default;
};

template <class Real>
using PhasesPtr = std::shared_ptr<const PhaseSet<Real>>;

template <class Real>
PhasesPtr<Real> make_phases(const std::vector<DerivedMode<Real>>& modes)
{
    PhaseSet<Real> ps;
    for (const auto& m : modes) {
        ps.k.push_back(m.k);
        ps.c.push_back(m.c);
        ps.y0.push_back(m.y0);
    }
    return std::make_shared<const PhaseSet<Real>>(std::move(ps));
}

using MultiIndex = std::vector<int>;

/// value = mantissa * exp(log_scale). `magnitude` is sum |term| on the same
/// scale, i.e. the natural yardstick for rounding error in the sum.
template <class T>
struct ScaledValue {
    T mantissa{};
    real_t<T> magnitude{};
    real_t<T> log_scale{};

    T value() const
    {
        using std::abs;
        if (mantissa == T(0))
            return T(0);
        const T v = mantissa * std::exp(log_scale);
        if (!std::isfinite(abs(v)))
            throw Error(ErrorKind::Overflow, "exponential polynomial value is not representable");
        return v;
    }
};

/// Prune threshold: only genuine underflow is dropped.
inline constexpr double kPruneThreshold = 1e-300;

template <class T>
class ExpPoly {
public:
    using Real = real_t<T>;
    using Terms = std::map<MultiIndex, T>;

    explicit ExpPoly(PhasesPtr<Real> phases) : phases_(std::move(phases)) {}

    static ExpPoly constant(PhasesPtr<Real> phases, T value)
    {
        ExpPoly p(std::move(phases));
        p.add_term(MultiIndex(p.modes(), 0), value);
        return p;
    }

    static ExpPoly monomial(PhasesPtr<Real> phases, MultiIndex m, T value)
    {
        ExpPoly p(std::move(phases));
        p.add_term(std::move(m), value);
        return p;
    }

    const PhasesPtr<Real>& phases() const { return phases_; }
    std::size_t modes() const { return phases_->size(); }
    const Terms& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    bool is_zero() const { return terms_.empty(); }

    T coefficient(const MultiIndex& m) const
    {
        auto it = terms_.find(m);
        return it == terms_.end() ? T(0) : it->second;
    }

    void add_term(MultiIndex m, T value)
    {
        if (m.size() != modes())
            throw Error(ErrorKind::InvalidArgument, "multi-index length does not match phase count");
        auto [it, inserted] = terms_.try_emplace(std::move(m), value);
        if (!inserted)
            it->second += value;
        using std::abs;
        if (abs(it->second) < Real(kPruneThreshold))
            terms_.erase(it);
    }

    void set_coefficient(const MultiIndex& m, T value)
    {
        terms_.erase(m);
        add_term(m, value);
    }

    /// Sum of exponents m . xi at (y, t).
    Real exponent(const MultiIndex& m, Real y, Real t) const
    {
        Real e = 0;
        for (std::size_t j = 0; j < m.size(); ++j)
            if (m[j] != 0)
                e += Real(m[j]) * phases_->xi(j, y, t);
        return e;
    }

    /// Evaluation with the largest exponent factored out; never overflows.
    ScaledValue<T> eval_scaled(Real y, Real t) const
    {
        ScaledValue<T> out;
        if (terms_.empty())
            return out;
        std::vector<Real> exps;
        exps.reserve(terms_.size());
        Real shift = -std::numeric_limits<Real>::infinity();
        for (const auto& [m, c] : terms_) {
            exps.push_back(exponent(m, y, t));
            shift = std::max(shift, exps.back());
        }
        using std::abs;
        std::size_t i = 0;
        for (const auto& [m, c] : terms_) {
            const Real w = std::exp(exps[i++] - shift);
            out.mantissa += c * w;
            out.magnitude += abs(c) * w;
        }
        out.log_scale = shift;
        return out;
    }

    /// Value times exp(-log_scale), for combining several polynomials on one scale.
    T eval_relative(Real y, Real t, Real log_scale) const
    {
        T out{};
        for (const auto& [m, c] : terms_)
            out += c * std::exp(exponent(m, y, t) - log_scale);
        return out;
    }

    T operator()(Real y, Real t) const { return eval_scaled(y, t).value(); }

    bool operator==(const ExpPoly& other) const
    {
        return same_phases(other) && terms_ == other.terms_;
    }

    bool same_phases(const ExpPoly& other) const
    {
        return phases_ == other.phases_ || *phases_ == *other.phases_;
    }

    void require_same_phases(const ExpPoly& other) const
    {
        if (!same_phases(other))
            throw Error(ErrorKind::PhaseMismatch, "operands carry different phase sets");
    }

    ExpPoly& operator+=(const ExpPoly& other)
    {
        require_same_phases(other);
        for (const auto& [m, c] : other.terms_)
            add_term(m, c);
        return *this;
    }

    ExpPoly& operator-=(const ExpPoly& other)
    {
        require_same_phases(other);
        for (const auto& [m, c] : other.terms_)
            add_term(m, -c);
        return *this;
    }

    ExpPoly& operator*=(T s)
    {
        Terms scaled;
        using std::abs;
        for (const auto& [m, c] : terms_) {
            const T v = c * s;
            if (abs(v) >= Real(kPruneThreshold))
                scaled.emplace(m, v);
        }
        terms_ = std::move(scaled);
        return *this;
    }

    /// Multiplies every coefficient by a function of its multi-index.
    template <class F>
    ExpPoly map_coefficients(F&& f) const
    {
        ExpPoly out(phases_);
        for (const auto& [m, c] : terms_)
            out.add_term(m, f(m, c));
        return out;
    }

private:
    PhasesPtr<Real> phases_;
    Terms terms_;
};

template <class T>
ExpPoly<T> operator+(ExpPoly<T> a, const ExpPoly<T>& b)
{
    a += b;
    return a;
}

template <class T>
ExpPoly<T> operator-(ExpPoly<T> a, const ExpPoly<T>& b)
{
    a -= b;
    return a;
}

template <class T>
ExpPoly<T> operator-(ExpPoly<T> a)
{
    a *= T(-1);
    return a;
}

template <class T>
ExpPoly<T> operator*(ExpPoly<T> a, T s)
{
    a *= s;
    return a;
}

template <class T>
ExpPoly<T> operator*(T s, ExpPoly<T> a)
{
    a *= s;
    return a;
}

template <class T>
ExpPoly<T> operator*(const ExpPoly<T>& a, const ExpPoly<T>& b)
{
    a.require_same_phases(b);
    ExpPoly<T> out(a.phases());
    MultiIndex m(a.modes());
    for (const auto& [ma, ca] : a.terms())
        for (const auto& [mb, cb] : b.terms()) {
            for (std::size_t j = 0; j < m.size(); ++j)
                m[j] = ma[j] + mb[j];
            out.add_term(m, ca * cb);
        }
    return out;
}

template <class T>
ExpPoly<T> pow(const ExpPoly<T>& a, unsigned n)
{
    ExpPoly<T> out = ExpPoly<T>::constant(a.phases(), T(1));
    for (unsigned i = 0; i < n; ++i)
        out = out * a;
    return out;
}

template <class T>
ExpPoly<T> d_dy(const ExpPoly<T>& p)
{
    const auto& ph = *p.phases();
    return p.map_coefficients([&](const MultiIndex& m, T c) {
        real_t<T> w = 0;
        for (std::size_t j = 0; j < m.size(); ++j)
            w += real_t<T>(m[j]) * ph.k[j];
        return c * w;
    });
}

template <class T>
ExpPoly<T> d_dt(const ExpPoly<T>& p)
{
    const auto& ph = *p.phases();
    return p.map_coefficients([&](const MultiIndex& m, T c) {
        real_t<T> w = 0;
        for (std::size_t j = 0; j < m.size(); ++j)
            w += real_t<T>(m[j]) * ph.k[j] * ph.c[j];
        return c * w;
    });
}

template <class T>
T eval(const ExpPoly<T>& p, real_t<T> y, real_t<T> t)
{
    return p(y, t);
}

/// Drops imaginary parts after checking they are rounding residue relative
/// to the largest coefficient.
template <class Real>
ExpPoly<Real> real_part(const ExpPoly<std::complex<Real>>& p, Real tolerance = Real(1e-12))
{
    Real scale = 0;
    for (const auto& [m, c] : p.terms())
        scale = std::max(scale, std::abs(c));
    ExpPoly<Real> out(p.phases());
    for (const auto& [m, c] : p.terms()) {
        if (std::abs(c.imag()) > tolerance * std::max(scale, Real(1))) {
            std::ostringstream os;
            os << "coefficient has imaginary part " << static_cast<double>(c.imag());
            throw Error(ErrorKind::ComplexResidue, os.str());
        }
        out.add_term(m, c.real());
    }
    return out;
}

template <class Real>
ExpPoly<std::complex<Real>> to_complex(const ExpPoly<Real>& p)
{
    ExpPoly<std::complex<Real>> out(p.phases());
    for (const auto& [m, c] : p.terms())
        out.add_term(m, std::complex<Real>(c));
    return out;
}

/// num / den, both exponential polynomials over the same phases.
template <class Real = double>
class RationalExp {
public:
    using Poly = ExpPoly<Real>;

    RationalExp(Poly num, Poly den) : num_(std::move(num)), den_(std::move(den))
    {
        num_.require_same_phases(den_);
        if (den_.is_zero())
            throw Error(ErrorKind::ZeroDenominator, "denominator is the zero polynomial");
    }

    static RationalExp from_poly(Poly p)
    {
        auto one = Poly::constant(p.phases(), Real(1));
        return RationalExp(std::move(p), std::move(one));
    }

    const Poly& num() const { return num_; }
    const Poly& den() const { return den_; }
    const PhasesPtr<Real>& phases() const { return num_.phases(); }
    bool is_zero() const { return num_.is_zero(); }

    ScaledValue<Real> eval_scaled(Real y, Real t) const
    {
        const auto n = num_.eval_scaled(y, t);
        const auto d = den_.eval_scaled(y, t);
        if (d.mantissa == Real(0)) {
            std::ostringstream os;
            os << "denominator vanishes at y=" << static_cast<double>(y)
               << " t=" << static_cast<double>(t);
            throw Error(ErrorKind::ZeroDenominator, os.str());
        }
        ScaledValue<Real> out;
        out.mantissa = n.mantissa / d.mantissa;
        out.magnitude = std::abs(out.mantissa);
        out.log_scale = n.mantissa == Real(0) ? Real(0) : n.log_scale - d.log_scale;
        return out;
    }

    Real operator()(Real y, Real t) const { return eval_scaled(y, t).value(); }

private:
    Poly num_;
    Poly den_;
};

template <class Real>
RationalExp<Real> operator+(const RationalExp<Real>& a, const RationalExp<Real>& b)
{
    if (a.den() == b.den())
        return RationalExp<Real>(a.num() + b.num(), a.den());
    return RationalExp<Real>(a.num() * b.den() + b.num() * a.den(), a.den() * b.den());
}

template <class Real>
RationalExp<Real> operator-(const RationalExp<Real>& a)
{
    return RationalExp<Real>(-a.num(), a.den());
}

template <class Real>
RationalExp<Real> operator-(const RationalExp<Real>& a, const RationalExp<Real>& b)
{
    return a + (-b);
}

template <class Real>
RationalExp<Real> operator*(const RationalExp<Real>& a, const RationalExp<Real>& b)
{
    return RationalExp<Real>(a.num() * b.num(), a.den() * b.den());
}

template <class Real>
RationalExp<Real> operator*(Real s, const RationalExp<Real>& a)
{
    return RationalExp<Real>(s * a.num(), a.den());
}

template <class Real>
RationalExp<Real> d_dy(const RationalExp<Real>& r)
{
    return RationalExp<Real>(d_dy(r.num()) * r.den() - r.num() * d_dy(r.den()), r.den() * r.den());
}

template <class Real>
RationalExp<Real> d_dt(const RationalExp<Real>& r)
{
    return RationalExp<Real>(d_dt(r.num()) * r.den() - r.num() * d_dt(r.den()), r.den() * r.den());
}

template <class Real>
Real eval(const RationalExp<Real>& r, Real y, Real t)
{
    return r(y, t);
}

/// Numerator of (ln f)_ty over f^2: f f_ty - f_t f_y.
template <class Real>
ExpPoly<Real> log_mixed_numerator(const ExpPoly<Real>& f)
{
    const auto fy = d_dy(f);
    const auto ft = d_dt(f);
    return f * d_dt(fy) - ft * fy;
}

/// (ln f)_ty = (f f_ty - f_t f_y) / f^2, exactly.
template <class Real>
RationalExp<Real> log_mixed_derivative(const ExpPoly<Real>& f)
{
    if (f.is_zero())
        throw Error(ErrorKind::InvalidArgument, "logarithm of the zero polynomial");
    return RationalExp<Real>(log_mixed_numerator(f), f * f);
}

/// (ln r)_ty for r = num / den, over the common denominator num^2 den^2.
template <class Real>
RationalExp<Real> rational_mixed_log_derivative(const RationalExp<Real>& r)
{
    if (r.num().is_zero())
        throw Error(ErrorKind::InvalidArgument, "logarithm of the zero rational function");
    const auto n2 = r.num() * r.num();
    const auto d2 = r.den() * r.den();
    return RationalExp<Real>(log_mixed_numerator(r.num()) * d2 - log_mixed_numerator(r.den()) * n2,
                             n2 * d2);
}

} // namespace dpsol
