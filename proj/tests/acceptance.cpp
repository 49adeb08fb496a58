// Acceptance run: one PASS/FAIL line per criterion, exit status 0 only if
// every criterion passes.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dpsol/scenario.hpp"

#ifndef DPSOL_CLI
#define DPSOL_CLI "dpsol"
#endif

using namespace dpsol;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            if (!detail.empty())
                detail += "; ";
            detail += what;
        }
    }
};

std::string sci(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", v);
    return buf;
}

Grid grid_for(const ScenarioConfig& c)
{
    Grid g;
    g.times = c.times;
    return g;
}

// Random admissible specs, all four sign patterns.
SolitonSpec random_spec(std::mt19937_64& rng)
{
    auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    SolitonSpec s;
    s.kappa = uni(0.5, 2.5);
    auto mode = [&](Sign sign) {
        const double kk = sign == Sign::Loop ? uni(2.2, 6.0) : uni(0.15, 0.85);
        return ModeSpec{kk / s.kappa, sign, uni(-3.0, 3.0)};
    };
    const int pattern = std::uniform_int_distribution<int>(0, 4)(rng);
    s.modes.push_back(mode(pattern == 1 || pattern == 4 ? Sign::Smooth : Sign::Loop));
    if (pattern >= 2) {
        ModeSpec m;
        do
            m = mode(pattern == 2 ? Sign::Loop : Sign::Smooth);
        while (std::abs(m.k - s.modes[0].k) * s.kappa < 0.2);
        s.modes.push_back(m);
    }
    return s;
}

std::vector<ScenarioConfig> figures() { return resolve_preset("all-figures"); }

// Applies `check` to every figure and keeps the worst residual.
template <class F>
Outcome per_figure(double tol, F&& check)
{
    Outcome o;
    double worst = 0.0;
    for (const auto& c : figures()) {
        const auto f = assemble_fields<double>(c.spec);
        const CheckResult r = check(c, f);
        worst = std::max(worst, r.residual);
        o.require(r.pass, c.name + " residual " + sci(r.residual));
    }
    o.detail = "max residual " + sci(worst) + " (tol " + sci(tol) + ")" + (o.detail.empty() ? "" : "; " + o.detail);
    return o;
}

Outcome tau_consistency()
{
    Outcome o;
    double worst = 0.0;
    auto run = [&](const SolitonSpec& spec, std::uint64_t seed, const std::string& label) {
        const Model<double> model(spec);
        const auto r = check_det_consistency(model, ProbeBox{-30, 30, -20, 20, 1000, seed});
        worst = std::max(worst, r.residual);
        o.require(r.pass, label + " residual " + sci(r.residual));
    };
    for (const auto& c : figures())
        run(c.spec, 101, c.name);
    std::mt19937_64 rng(77);
    for (int i = 0; i < 50; ++i)
        run(random_spec(rng), 200 + i, "random #" + std::to_string(i));
    o.detail = "max relative difference " + sci(worst) + " over 55 parameter sets" +
               (o.detail.empty() ? "" : "; " + o.detail);
    return o;
}

Outcome hodograph()
{
    Outcome o;
    double d_worst = 0.0, gap_worst = 0.0;
    for (const auto& c : figures()) {
        const auto f = assemble_fields<double>(c.spec);
        const auto d = check_x_map_derivative(f, grid_for(c));
        const auto g = check_x_map_gap(f, grid_for(c));
        d_worst = std::max(d_worst, d.residual);
        gap_worst = std::max(gap_worst, g.residual);
        o.require(d.pass, c.name + " dx/dy " + sci(d.residual));
        o.require(g.pass, c.name + " gap " + sci(g.residual));
    }
    o.detail = "|dx/dy - 1/q| " + sci(d_worst) + ", gap spread " + sci(gap_worst) +
               (o.detail.empty() ? "" : "; " + o.detail);
    return o;
}

Outcome loop_anatomy()
{
    Outcome o;
    std::ostringstream text;
    {
        const auto f = assemble_fields<double>(presets::fig1().spec);
        const auto curve = sample_frame(f, 0.0, -20.0, 20.0, 4001);
        bool nonpositive = true;
        for (const auto& s : curve.samples)
            nonpositive = nonpositive && s.u <= 0.0;
        const auto troughs = trough_positions(f, curve);
        o.require(curve.sign_changes == 2, "fig1 sign changes " + std::to_string(curve.sign_changes));
        o.require(troughs.size() == 1, "fig1 troughs " + std::to_string(troughs.size()));
        o.require(nonpositive, "fig1 has u > 0");
        text << "fig1: " << curve.sign_changes << " sign changes, " << troughs.size() << " trough";
    }
    {
        const auto f = assemble_fields<double>(presets::fig2().spec);
        const auto curve = sample_frame(f, -10.0, -20.0, 20.0, 4001);
        const auto troughs = trough_positions(f, curve);
        o.require(curve.sign_changes == 4, "fig2 sign changes " + std::to_string(curve.sign_changes));
        o.require(troughs.size() == 2, "fig2 troughs " + std::to_string(troughs.size()));
        text << "; fig2(t=-10): " << curve.sign_changes << " sign changes, " << troughs.size() << " troughs";
    }
    {
        const auto f = assemble_fields<double>(presets::fig5().spec);
        const auto frame = frame_features(f, -3.0);
        const auto& curve = frame.curve;
        const auto& troughs = frame.troughs;
        const auto& crests = frame.crests;
        o.require(curve.sign_changes == 2, "fig5 sign changes " + std::to_string(curve.sign_changes));
        o.require(troughs.size() == 1 && crests.size() == 1, "fig5 feature counts");
        text << "; fig5(t=-3): " << curve.sign_changes << " sign changes, " << troughs.size() << " trough, "
             << crests.size() << " crest";
    }
    o.detail = text.str() + (o.detail.empty() ? "" : "; " + o.detail);
    return o;
}

Outcome elasticity()
{
    Outcome o;
    const auto spec = presets::fig2().spec;
    const auto near = check_elasticity(spec, 10.0);
    const auto far = check_elasticity(spec, 50.0);
    o.require(near[0].pass, "t=+-10 depth mismatch " + sci(near[0].residual) + " > 1e-3");
    o.require(far[1].pass, "t=+-50 vs single-mode depth " + sci(far[1].residual));
    o.detail = "t=+-10 sorted-pair mismatch " + sci(near[0].residual) + ", t=+-50 vs single mode " +
               sci(far[1].residual) + " (tol 1.00e-03)" + (o.detail.empty() ? "" : "; " + o.detail);
    return o;
}

Outcome drift()
{
    Outcome o;
    const auto two = check_drift_direction(presets::fig2().spec, -10.0, -8.0);
    const auto mixed = check_drift_direction(presets::fig5().spec, -3.0, -2.0);
    o.require(two.pass, "fig2: " + two.detail);
    o.require(mixed.pass, "fig5: " + mixed.detail);
    o.detail = "fig2 " + two.detail + " fig5 " + mixed.detail + (o.detail.empty() ? "" : "; " + o.detail);
    return o;
}

Outcome negative_controls()
{
    Outcome o;
    std::size_t count = 0;
    double weakest = std::numeric_limits<double>::infinity();
    for (const auto& c : figures()) {
        const auto f = assemble_fields<double>(c.spec);
        const auto g = grid_for(c);
        const std::pair<PerturbTarget, const ExpPoly<double>*> targets[] = {
            {PerturbTarget::FTilde, &f.f_tilde}, {PerturbTarget::G1, &f.g1}, {PerturbTarget::G2, &f.g2},
            {PerturbTarget::H, &f.h}};
        for (const auto& [target, poly] : targets)
            for (const auto& [m, coeff] : poly->terms()) {
                const auto p = perturbed(f, Perturbation{target, m, 1e-3});
                const double factor =
                    std::max({check_compact_pde(p, g).residual / tolerance::compact_pde,
                              check_constitutive(p, g).residual / tolerance::constitutive,
                              check_factorization(p, ProbeBox{}).residual / tolerance::factorization,
                              check_dual_route_u(p, ProbeBox{}).residual / tolerance::dual_route_u});
                ++count;
                weakest = std::min(weakest, factor);
                o.require(factor >= 100.0, c.name + " coefficient caught only by factor " + sci(factor));
            }
    }
    o.detail = std::to_string(count) + " perturbations, weakest failure " + sci(weakest) + "x tolerance" +
               (o.detail.empty() ? "" : "; " + o.detail);
    return o;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome determinism()
{
    Outcome o;
    const auto root = std::filesystem::temp_directory_path() / "dpsol_acceptance";
    std::filesystem::remove_all(root);
    std::string reference;
    int runs = 0;
    for (int workers : {1, 1, 2, 4, 7}) {
        const auto dir = root / ("run" + std::to_string(runs++));
        const std::string cmd = std::string("\"") + DPSOL_CLI + "\" solve --preset fig2 --out \"" + dir.string() +
                                "\" --workers " + std::to_string(workers) + " > /dev/null";
        const int rc = std::system(cmd.c_str());
        o.require(rc == 0, "solve exited with " + std::to_string(rc));
        const auto csv = slurp(dir / "fig2.csv");
        o.require(!csv.empty(), "empty CSV");
        if (reference.empty())
            reference = csv;
        o.require(csv == reference, "CSV differs with " + std::to_string(workers) + " workers");
    }
    std::filesystem::remove_all(root);
    o.detail = std::to_string(runs) + " runs with 1,1,2,4,7 workers, " + std::to_string(reference.size()) + " bytes" +
               (o.detail.empty() ? "" : "; " + o.detail);
    return o;
}

} // namespace

int main()
{
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {"tau_consistency", tau_consistency},
        {"compact_pde", [] { return per_figure(tolerance::compact_pde, [](auto& c, auto& f) {
                                 return check_compact_pde(f, grid_for(c));
                             }); }},
        {"constitutive", [] { return per_figure(tolerance::constitutive, [](auto& c, auto& f) {
                                  return check_constitutive(f, grid_for(c));
                              }); }},
        {"factorization", [] { return per_figure(tolerance::factorization, [](auto&, auto& f) {
                                   return check_factorization(f, ProbeBox{});
                               }); }},
        {"dual_route_u", [] { return per_figure(tolerance::dual_route_u, [](auto&, auto& f) {
                                  return check_dual_route_u(f, ProbeBox{});
                              }); }},
        {"hodograph", hodograph},
        {"loop_anatomy", loop_anatomy},
        {"elastic_collision", elasticity},
        {"drift_directions", drift},
        {"negative_controls", negative_controls},
        {"determinism", determinism},
    };

    int failed = 0;
    int index = 0;
    for (const auto& c : criteria) {
        ++index;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[%2d] %-18s %s  %s  (%.2fs)\n", index, c.name, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
        failed += !o.pass;
    }
    std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
