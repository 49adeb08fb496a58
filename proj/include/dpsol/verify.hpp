#pragma once

// Independent verification oracles for a solution family: PDE residuals in
// the reciprocal variables, the constitutive relation, the perfect-square
// factorization, tau consistency, the hodograph identity, and the structural
// collision diagnostics (loop anatomy, elasticity, drift direction).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dpsol/error.hpp"
#include "dpsol/exp_poly.hpp"
#include "dpsol/fields.hpp"
#include "dpsol/mode_params.hpp"
#include "dpsol/tau.hpp"

namespace dpsol {

struct Grid {
    double y_min = -20.0;
    double y_max = 20.0;
    std::size_t n_y = 400;
    std::vector<double> times;

    void validate() const
    {
        if (!(y_min < y_max))
            throw Error(ErrorKind::InvalidArgument, "grid needs y_min < y_max");
        if (n_y < 16)
            throw Error(ErrorKind::InvalidArgument, "grid needs at least 16 points");
    }

    double y(std::size_t i) const
    {
        return i + 1 == n_y ? y_max : y_min + (y_max - y_min) * double(i) / double(n_y - 1);
    }
};

struct CheckResult {
    std::string name;
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::size_t probes = 0;
    double worst_y = 0.0;
    double worst_t = 0.0;
    std::string detail;
};

struct VerificationReport {
    std::vector<CheckResult> checks;

    bool all_passed() const
    {
        return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
    }

    void append(const VerificationReport& other)
    {
        checks.insert(checks.end(), other.checks.begin(), other.checks.end());
    }
};

/// Tolerances for each identity, keyed to its dominant error source.
namespace tolerance {
inline constexpr double compact_pde = 1e-9;
inline constexpr double constitutive = 1e-8;
inline constexpr double factorization = 1e-10;
inline constexpr double dual_route_u = 1e-9;
inline constexpr double det_consistency = 1e-10;
inline constexpr double x_map_derivative = 1e-5;
inline constexpr double x_map_gap = 1e-6;
inline constexpr double elasticity = 1e-3;
} // namespace tolerance

namespace detail {

// Running maximum of a residual with its location.
struct Worst {
    double value = 0.0;
    double y = 0.0;
    double t = 0.0;
    std::size_t probes = 0;

    void observe(double r, double yy, double tt)
    {
        ++probes;
        if (!(r <= value)) { // NaN counts as worst
            value = std::isnan(r) ? std::numeric_limits<double>::infinity() : r;
            y = yy;
            t = tt;
        }
    }
};

inline CheckResult finish(std::string name, const Worst& w, double tol, std::string detail = {})
{
    CheckResult r;
    r.name = std::move(name);
    r.residual = w.value;
    r.tolerance = tol;
    r.pass = w.value <= tol;
    r.probes = w.probes;
    r.worst_y = w.y;
    r.worst_t = w.t;
    r.detail = std::move(detail);
    return r;
}

template <class Real>
Real scaled_value_at(const ScaledValue<Real>& v, Real reference_log)
{
    return v.mantissa * std::exp(v.log_scale - reference_log);
}

// A polynomial with its first derivatives, evaluated on one shared scale so
// that quotients are formed from values rather than from expanded products.
template <class Real>
struct PolyJet {
    struct Value {
        Real v, y, t, yy, ty, log_scale;
    };

    ExpPoly<Real> p, py, pt, pyy, pty;

    explicit PolyJet(const ExpPoly<Real>& poly)
        : p(poly), py(d_dy(poly)), pt(d_dt(poly)), pyy(d_dy(py)), pty(d_dt(py))
    {
    }

    Value at(Real y, Real t) const
    {
        const Real r = p.eval_scaled(y, t).log_scale;
        return {p.eval_relative(y, t, r), py.eval_relative(y, t, r), pt.eval_relative(y, t, r),
                pyy.eval_relative(y, t, r), pty.eval_relative(y, t, r), r};
    }
};

// q, u and the derivatives the identities need, by the quotient rule on values.
template <class Real>
struct PointFields {
    Real q, q_y, q_t, u, u_y, u_yy;
};

template <class Real>
class FieldJets {
public:
    explicit FieldJets(const FieldSet<Real>& fields)
        : kappa_(fields.kappa()), f_(fields.f_tilde), g_(fields.g), h_(fields.h)
    {
    }

    PointFields<Real> at(Real y, Real t) const
    {
        const auto F = f_.at(y, t);
        const auto G = g_.at(y, t);
        const auto H = h_.at(y, t);
        const Real k3 = kappa_ * kappa_ * kappa_;
        const Real s_gf = std::exp(G.log_scale - F.log_scale);
        const Real s_hg = std::exp(H.log_scale - G.log_scale);
        PointFields<Real> o;
        o.q = kappa_ * s_gf * G.v / F.v;
        o.q_y = kappa_ * s_gf * (G.y * F.v - G.v * F.y) / (F.v * F.v);
        o.q_t = kappa_ * s_gf * (G.t * F.v - G.v * F.t) / (F.v * F.v);
        const Real w = H.y * G.v - H.v * G.y;
        o.u = k3 * s_hg * H.v / G.v;
        o.u_y = k3 * s_hg * w / (G.v * G.v);
        o.u_yy = k3 * s_hg * ((H.yy * G.v - H.v * G.yy) / (G.v * G.v) - Real(2) * G.y * w / (G.v * G.v * G.v));
        return o;
    }

private:
    Real kappa_;
    PolyJet<Real> f_, g_, h_;
};

} // namespace detail

/// max |q_t + q^2 u_y| / max(|q_t|, |q^2 u_y|, 1), derivatives taken exactly.
template <class Real>
CheckResult check_compact_pde(const FieldSet<Real>& fields, const Grid& grid)
{
    grid.validate();
    const detail::FieldJets<Real> jets(fields);
    detail::Worst w;
    for (double t : grid.times)
        for (std::size_t i = 0; i < grid.n_y; ++i) {
            const Real y = grid.y(i);
            const auto p = jets.at(y, Real(t));
            const Real a = p.q_t;
            const Real b = p.q * p.q * p.u_y;
            const Real scale = std::max({std::abs(a), std::abs(b), Real(1)});
            w.observe(double(std::abs(a + b) / scale), double(y), t);
        }
    return detail::finish("compact_pde", w, tolerance::compact_pde);
}

/// |u - u_xx + kappa^3 - q^3| with d/dx = q d/dy at fixed t, relative to the
/// largest of kappa^3, |u|, |u_xx| and |q|^3. Near a pole of q the last two
/// grow without bound while their difference stays finite.
template <class Real>
CheckResult check_constitutive(const FieldSet<Real>& fields, const Grid& grid)
{
    grid.validate();
    const Real k3 = fields.kappa() * fields.kappa() * fields.kappa();
    const detail::FieldJets<Real> jets(fields);
    detail::Worst w;
    for (double t : grid.times)
        for (std::size_t i = 0; i < grid.n_y; ++i) {
            const Real y = grid.y(i);
            const auto p = jets.at(y, Real(t));
            const Real u_xx = p.q * (p.q_y * p.u_y + p.q * p.u_yy);
            const Real q3 = p.q * p.q * p.q;
            const Real r = p.u - u_xx + k3 - q3;
            const Real scale = std::max({k3, std::abs(p.u), std::abs(u_xx), std::abs(q3)});
            w.observe(double(std::abs(r) / scale), double(y), t);
        }
    return detail::finish("constitutive", w, tolerance::constitutive);
}

struct ProbeBox {
    double y_min = -20.0;
    double y_max = 20.0;
    double t_min = -10.0;
    double t_max = 10.0;
    std::size_t count = 500;
    std::uint64_t seed = 20240613;
};

/// |(kappa^2 - (ln f)_ty) f_tilde^2 - kappa^2 g^2| / (kappa^2 g^2) at random
/// probes. (ln f)_ty is formed from the values of f and its derivatives.
template <class Real>
CheckResult check_factorization(const FieldSet<Real>& fields, const ProbeBox& box, const ExpPoly<Real>& f)
{
    const Real k2 = fields.kappa() * fields.kappa();
    const detail::PolyJet<Real> fj(f), ftj(fields.f_tilde), gj(fields.g);
    std::mt19937_64 rng(box.seed);
    std::uniform_real_distribution<double> ys(box.y_min, box.y_max), ts(box.t_min, box.t_max);
    detail::Worst w;
    for (std::size_t i = 0; i < box.count; ++i) {
        const double y = ys(rng), t = ts(rng);
        const auto F = fj.at(Real(y), Real(t));
        const auto Ft = ftj.at(Real(y), Real(t));
        const auto G = gj.at(Real(y), Real(t));
        const Real mixed = (F.v * F.ty - F.t * F.y) / (F.v * F.v);
        // Both sides on the scale exp(2 * log_scale of f_tilde).
        const Real lhs = (k2 - mixed) * Ft.v * Ft.v;
        const Real s = std::exp(G.log_scale - Ft.log_scale);
        const Real rhs = k2 * G.v * G.v * s * s;
        w.observe(double(std::abs(lhs - rhs) / std::abs(rhs)), y, t);
    }
    return detail::finish("factorization", w, tolerance::factorization);
}

/// Same identity with f = (prod a_j^2) f_tilde; the constant factor drops out
/// of (ln f)_ty, so the values of f_tilde are used directly.
template <class Real>
CheckResult check_factorization(const FieldSet<Real>& fields, const ProbeBox& box)
{
    const Real k2 = fields.kappa() * fields.kappa();
    const detail::PolyJet<Real> fj(fields.f_tilde), gj(fields.g);
    std::mt19937_64 rng(box.seed);
    std::uniform_real_distribution<double> ys(box.y_min, box.y_max), ts(box.t_min, box.t_max);
    detail::Worst w;
    for (std::size_t i = 0; i < box.count; ++i) {
        const double y = ys(rng), t = ts(rng);
        const auto F = fj.at(Real(y), Real(t));
        const auto G = gj.at(Real(y), Real(t));
        const Real lhs = k2 * F.v * F.v - (F.v * F.ty - F.t * F.y);
        const Real s = std::exp(G.log_scale - F.log_scale);
        const Real rhs = k2 * G.v * G.v * s * s;
        w.observe(double(std::abs(lhs - rhs) / std::abs(rhs)), y, t);
    }
    return detail::finish("factorization", w, tolerance::factorization);
}

/// Closed-form u = kappa^3 h / g against the pipeline -q (ln q)_ty + q^3 - kappa^3
/// built as a RationalExp. The pipeline subtracts two terms of size |q|^3, so
/// the error is measured against max(|u|, |q|^3, kappa^3).
template <class Real>
CheckResult check_dual_route_u(const FieldSet<Real>& fields, const ProbeBox& box)
{
    const auto piped = u_pipeline(fields);
    const detail::FieldJets<Real> jets(fields);
    const Real k3 = fields.kappa() * fields.kappa() * fields.kappa();
    std::mt19937_64 rng(box.seed);
    std::uniform_real_distribution<double> ys(box.y_min, box.y_max), ts(box.t_min, box.t_max);
    detail::Worst w;
    for (std::size_t i = 0; i < box.count; ++i) {
        const double y = ys(rng), t = ts(rng);
        const auto p = jets.at(Real(y), Real(t));
        const Real b = piped(Real(y), Real(t));
        const Real scale = std::max({std::abs(p.u), std::abs(p.q * p.q * p.q), k3});
        w.observe(double(std::abs(p.u - b) / scale), y, t);
    }
    return detail::finish("dual_route_u", w, tolerance::dual_route_u);
}

/// Pairwise difference of det_numeric, det_symbolic and the closed form,
/// relative to the summed term magnitude of the expansion.
template <class Real>
CheckResult check_det_consistency(const Model<Real>& model, const ProbeBox& box)
{
    const auto symbolic = det_symbolic(model);
    const auto closed = closed_form_tau(model);
    std::mt19937_64 rng(box.seed);
    std::uniform_real_distribution<double> ys(box.y_min, box.y_max), ts(box.t_min, box.t_max);
    detail::Worst w;
    for (std::size_t i = 0; i < box.count; ++i) {
        const double y = ys(rng), t = ts(rng);
        const auto s = symbolic.eval_scaled(Real(y), Real(t));
        const auto c = closed.eval_scaled(Real(y), Real(t));
        const auto n = det_numeric_scaled(model, Real(y), Real(t));
        const Real ref = s.log_scale;
        const Real vs = s.mantissa;
        const Real vc = detail::scaled_value_at(c, ref);
        const Real vn = detail::scaled_value_at(n, ref);
        const Real scale = s.magnitude;
        const Real r = std::max({std::abs(vs - vc), std::abs(vs - vn), std::abs(vc - vn)}) / scale;
        w.observe(double(r), y, t);
    }
    return detail::finish("det_consistency", w, tolerance::det_consistency);
}

/// Central difference of x_closed against 1/q = f_tilde / (kappa g).
template <class Real>
CheckResult check_x_map_derivative(const FieldSet<Real>& fields, const Grid& grid, Real step = Real(1e-4))
{
    grid.validate();
    const RationalExp<Real> inv_q(fields.f_tilde, fields.kappa() * fields.g);
    detail::Worst w;
    for (double t : grid.times)
        for (std::size_t i = 0; i < grid.n_y; ++i) {
            const Real y = grid.y(i);
            const Real fd = (x_closed(fields, y + step, Real(t)) - x_closed(fields, y - step, Real(t))) / (Real(2) * step);
            w.observe(double(std::abs(fd - inv_q(y, Real(t)))), double(y), t);
        }
    return detail::finish("x_map_derivative", w, tolerance::x_map_derivative);
}

/// x_closed - x_quadrature must be the same constant for every y at fixed t.
template <class Real>
CheckResult check_x_map_gap(const FieldSet<Real>& fields, const Grid& grid, std::size_t points_per_time = 41)
{
    grid.validate();
    detail::Worst w;
    std::ostringstream detail_text;
    for (double t : grid.times) {
        double first = 0.0;
        for (std::size_t i = 0; i < points_per_time; ++i) {
            const Real y = Real(grid.y_min) + (Real(grid.y_max) - Real(grid.y_min)) * Real(i) / Real(points_per_time - 1);
            const double gap = double(x_closed(fields, y, Real(t)) - x_quadrature(fields, y, Real(t)));
            if (i == 0) {
                first = gap;
                detail_text << "t=" << t << " offset=" << gap << "; ";
            }
            w.observe(std::abs(gap - first), double(y), t);
        }
    }
    return detail::finish("x_map_gap", w, tolerance::x_map_gap, detail_text.str());
}

/// y window that contains every soliton centre y0_j - c_j t with a margin.
template <class Real>
std::pair<double, double> soliton_window(const Model<Real>& model, double t, double margin = 10.0)
{
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& m : model.modes) {
        const double centre = double(m.y0 - m.c * Real(t));
        lo = std::min(lo, centre);
        hi = std::max(hi, centre);
    }
    return {lo - margin, hi + margin};
}

/// Troughs (u < 0 minima) and crests (u > 0 maxima) of a frame sampled on a
/// window around the solitons with spacing `dy`.
template <class Real = double>
struct FrameFeatures {
    ParametricCurve<Real> curve;
    std::vector<Feature<Real>> troughs;
    std::vector<Feature<Real>> crests;
};

template <class Real>
FrameFeatures<Real> frame_features(const FieldSet<Real>& fields, double t, double dy = 0.01, double margin = 10.0)
{
    const auto [lo, hi] = soliton_window(fields.model, t, margin);
    const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / dy)) + 1;
    FrameFeatures<Real> out;
    out.curve = sample_frame(fields, Real(t), Real(lo), Real(hi), n);
    out.troughs = trough_positions(fields, out.curve);
    out.crests = crest_positions(fields, out.curve);
    return out;
}

/// Depth |u| of the single-mode wave of one mode of `spec`; its extremum sits at xi = 0.
inline double single_mode_extremum(const SolitonSpec& spec, std::size_t j)
{
    SolitonSpec one{spec.kappa, {spec.modes.at(j)}, spec.d};
    const auto fields = assemble_fields<double>(one);
    return fields.u(one.modes[0].y0, 0.0);
}

namespace detail {

inline std::vector<double> sorted_abs_u(const std::vector<Feature<double>>& f)
{
    std::vector<double> out;
    for (const auto& p : f)
        out.push_back(std::abs(p.u));
    std::sort(out.begin(), out.end());
    return out;
}

inline double max_relative_mismatch(const std::vector<double>& a, const std::vector<double>& b)
{
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(std::abs(a[i]), std::abs(b[i])));
    return worst;
}

} // namespace detail

/// Elastic collision: trough (and crest) depths at -t_far and +t_far agree by
/// depth-sorted pairing, and each matches the depth of its single-mode wave.
/// Returns two results: "elasticity" and "asymptotic_depths".
inline std::vector<CheckResult> check_elasticity(const SolitonSpec& spec, double t_far)
{
    const auto fields = assemble_fields<double>(spec);
    std::size_t expected_troughs = 0, expected_crests = 0;
    std::vector<double> single_troughs, single_crests;
    for (std::size_t j = 0; j < spec.size(); ++j) {
        const double e = single_mode_extremum(spec, j);
        if (classify_mode(spec.kappa, spec.modes[j]) == Regime::Loop) {
            ++expected_troughs;
            single_troughs.push_back(std::abs(e));
        } else {
            ++expected_crests;
            single_crests.push_back(std::abs(e));
        }
    }
    std::sort(single_troughs.begin(), single_troughs.end());
    std::sort(single_crests.begin(), single_crests.end());

    const auto before = frame_features(fields, -t_far);
    const auto after = frame_features(fields, t_far);
    for (const auto* fr : {&before, &after}) {
        if (fr->troughs.size() != expected_troughs || fr->crests.size() != expected_crests) {
            std::ostringstream os;
            os << "frame at t=" << fr->curve.t << " has " << fr->troughs.size() << " troughs and "
               << fr->crests.size() << " crests, expected " << expected_troughs << " and " << expected_crests;
            throw Error(ErrorKind::TroughCountMismatch, os.str());
        }
    }
    const auto bt = detail::sorted_abs_u(before.troughs), at = detail::sorted_abs_u(after.troughs);
    const auto bc = detail::sorted_abs_u(before.crests), ac = detail::sorted_abs_u(after.crests);

    detail::Worst elastic, asymptotic;
    elastic.observe(std::max(detail::max_relative_mismatch(bt, at), detail::max_relative_mismatch(bc, ac)), 0.0, t_far);
    for (const auto* depths : {&bt, &at})
        asymptotic.observe(detail::max_relative_mismatch(*depths, single_troughs), 0.0, t_far);
    for (const auto* heights : {&bc, &ac})
        asymptotic.observe(detail::max_relative_mismatch(*heights, single_crests), 0.0, t_far);
    return {detail::finish("elasticity", elastic, tolerance::elasticity),
            detail::finish("asymptotic_depths", asymptotic, tolerance::elasticity)};
}

/// Sign changes of q along y: 2 per loop mode once the troughs are more than
/// `separation` apart in y, and the numerator g never changes sign.
template <class Real>
CheckResult check_loop_anatomy(const FieldSet<Real>& fields, const Grid& grid, double separation = 5.0)
{
    grid.validate();
    std::size_t loops = 0;
    for (const auto& m : fields.model.modes)
        loops += m.epsilon == Sign::Loop;
    detail::Worst w;
    std::ostringstream text;
    for (double t : grid.times) {
        const auto frame = sample_frame(fields, Real(t), Real(grid.y_min), Real(grid.y_max), grid.n_y);
        int g_sign = 0;
        double bad = 0.0;
        for (const auto& s : frame.samples) {
            const auto gv = fields.g.eval_scaled(s.y, Real(t));
            const int sg = (gv.mantissa > Real(0)) - (gv.mantissa < Real(0));
            if (sg == 0 || (g_sign != 0 && sg != g_sign))
                bad += 1.0;
            g_sign = sg;
        }
        const auto troughs = trough_positions(fields, frame);
        bool separated = troughs.size() == loops;
        for (std::size_t i = 1; i < troughs.size() && separated; ++i)
            separated = std::abs(troughs[i].y - troughs[i - 1].y) > Real(separation);
        if (separated && frame.sign_changes != 2 * loops)
            bad += 1.0;
        text << "t=" << t << ": " << frame.sign_changes << " sign changes, " << troughs.size() << " troughs"
             << (separated ? "" : " (not separated)") << "; ";
        w.observe(bad, 0.0, t);
    }
    return detail::finish("loop_anatomy", w, 0.0, text.str());
}

/// Troughs must move toward -x and crests toward +x between t1 < t2.
inline CheckResult check_drift_direction(const SolitonSpec& spec, double t1, double t2)
{
    const auto fields = assemble_fields<double>(spec);
    const auto a = frame_features(fields, t1);
    const auto b = frame_features(fields, t2);
    if (a.troughs.size() != b.troughs.size() || a.crests.size() != b.crests.size())
        throw Error(ErrorKind::FeatureMatchFailure, "feature counts differ between the two times");
    auto by_depth = [](std::vector<Feature<double>> f) {
        std::sort(f.begin(), f.end(), [](const auto& l, const auto& r) { return std::abs(l.u) < std::abs(r.u); });
        return f;
    };
    const auto at = by_depth(a.troughs), bt = by_depth(b.troughs);
    const auto ac = by_depth(a.crests), bc = by_depth(b.crests);
    detail::Worst w;
    std::ostringstream text;
    const double dir = t2 > t1 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < at.size(); ++i) {
        const double dx = (bt[i].x - at[i].x) * dir;
        text << "trough dx=" << dx << "; ";
        w.observe(dx < 0.0 ? 0.0 : 1.0, at[i].y, t1);
    }
    for (std::size_t i = 0; i < ac.size(); ++i) {
        const double dx = (bc[i].x - ac[i].x) * dir;
        text << "crest dx=" << dx << "; ";
        w.observe(dx > 0.0 ? 0.0 : 1.0, ac[i].y, t1);
    }
    return detail::finish("drift_direction", w, 0.0, text.str());
}

/// At each time the narrower backward-running stretch of x must sit inside
/// the wider one (a small loop carried inside a large loop).
template <class Real>
CheckResult check_loop_containment(const FieldSet<Real>& fields, const std::vector<double>& times,
                                   double y_min = -20.0, double y_max = 20.0, std::size_t n = 8001)
{
    detail::Worst w;
    std::ostringstream text;
    for (double t : times) {
        const auto curve = sample_frame(fields, Real(t), Real(y_min), Real(y_max), n);
        auto loops = loop_x_extents(curve);
        double bad = 1.0;
        if (loops.size() == 2) {
            if (loops[0].width() < loops[1].width())
                std::swap(loops[0], loops[1]);
            bad = loops[0].contains(loops[1]) ? 0.0 : 1.0;
            text << "t=" << t << " outer=[" << loops[0].lo << "," << loops[0].hi << "] inner=[" << loops[1].lo << ","
                 << loops[1].hi << "]; ";
        } else {
            text << "t=" << t << " has " << loops.size() << " loops; ";
        }
        w.observe(bad, 0.0, t);
    }
    return detail::finish("loop_containment", w, 0.0, text.str());
}

/// Which closed-form polynomial a perturbation targets.
enum class PerturbTarget { FTilde, G1, G2, H };

struct Perturbation {
    PerturbTarget target = PerturbTarget::H;
    MultiIndex index;
    double relative = 1e-3;

    bool operator==(const Perturbation&) const = default;
};

/// Rebuilds a field set with one closed-form coefficient scaled by (1 + relative).
template <class Real>
FieldSet<Real> perturbed(const FieldSet<Real>& fields, const Perturbation& p)
{
    auto f_tilde = fields.f_tilde;
    auto g1 = fields.g1;
    auto g2 = fields.g2;
    auto h = fields.h;
    ExpPoly<Real>* target = nullptr;
    switch (p.target) {
    case PerturbTarget::FTilde: target = &f_tilde; break;
    case PerturbTarget::G1: target = &g1; break;
    case PerturbTarget::G2: target = &g2; break;
    case PerturbTarget::H: target = &h; break;
    }
    const Real c = target->coefficient(p.index);
    if (c == Real(0))
        throw Error(ErrorKind::InvalidArgument, "perturbation targets a coefficient that is not present");
    target->set_coefficient(p.index, c * (Real(1) + Real(p.relative)));
    return make_fields(fields.model, std::move(f_tilde), std::move(g1), std::move(g2), std::move(h));
}

struct SuiteOptions {
    Grid grid;
    ProbeBox det_probes{-30.0, 30.0, -20.0, 20.0, 1000, 7};
    ProbeBox u_probes{-20.0, 20.0, -10.0, 10.0, 500, 11};
    ProbeBox factor_probes{-20.0, 20.0, -10.0, 10.0, 500, 13};
    std::vector<Perturbation> perturbations;
    double elasticity_t_far = 0.0;     // 0 disables
    double asymptotic_t_far = 0.0;     // 0 disables
    std::vector<double> drift_times;   // two entries enable the drift check
    std::vector<double> containment_times;
    std::string label;
};

inline CheckResult failed_check(std::string name, const Error& e)
{
    CheckResult r;
    r.name = std::move(name);
    r.residual = std::numeric_limits<double>::infinity();
    r.pass = false;
    r.detail = e.what();
    return r;
}

/// Runs every applicable check for one scenario. Check names are prefixed by
/// `options.label` when it is not empty.
inline VerificationReport run_suite(const SolitonSpec& spec, const SuiteOptions& options)
{
    VerificationReport report;
    const std::string prefix = options.label.empty() ? std::string() : options.label + ".";
    auto add = [&](CheckResult r) {
        r.name = prefix + r.name;
        report.checks.push_back(std::move(r));
    };
    auto guarded = [&](const std::string& name, auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            add(failed_check(name, e));
        }
    };

    const Model<double> model(spec);
    auto fields = assemble_fields(model);
    for (const auto& p : options.perturbations)
        fields = perturbed(fields, p);

    guarded("det_consistency", [&] { add(check_det_consistency(model, options.det_probes)); });
    guarded("compact_pde", [&] { add(check_compact_pde(fields, options.grid)); });
    guarded("constitutive", [&] { add(check_constitutive(fields, options.grid)); });
    guarded("factorization", [&] { add(check_factorization(fields, options.factor_probes)); });
    guarded("dual_route_u", [&] { add(check_dual_route_u(fields, options.u_probes)); });
    guarded("x_map_derivative", [&] { add(check_x_map_derivative(fields, options.grid)); });
    guarded("x_map_gap", [&] { add(check_x_map_gap(fields, options.grid)); });
    if (loop_mode_count(spec) > 0)
        guarded("loop_anatomy", [&] { add(check_loop_anatomy(fields, options.grid)); });
    if (options.elasticity_t_far > 0.0)
        guarded("elasticity", [&] {
            auto r = check_elasticity(spec, options.elasticity_t_far);
            add(r[0]);
            if (options.asymptotic_t_far <= 0.0)
                add(r[1]);
        });
    if (options.asymptotic_t_far > 0.0)
        guarded("asymptotic_depths", [&] { add(check_elasticity(spec, options.asymptotic_t_far)[1]); });
    if (options.drift_times.size() == 2)
        guarded("drift_direction",
                [&] { add(check_drift_direction(spec, options.drift_times[0], options.drift_times[1])); });
    if (!options.containment_times.empty())
        guarded("loop_containment", [&] {
            add(check_loop_containment(fields, options.containment_times, options.grid.y_min, options.grid.y_max));
        });
    return report;
}

} // namespace dpsol
