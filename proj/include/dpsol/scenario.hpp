#pragma once

// Scenario configs (JSON), the figure presets, frame writers (CSV, SVG) and
// the solve/verify drivers behind the command line tool.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dpsol/error.hpp"
#include "dpsol/fields.hpp"
#include "dpsol/mode_params.hpp"
#include "dpsol/verify.hpp"

namespace dpsol {

/// Extra diagnostics a scenario may request from `verify`.
struct VerifyPlan {
    double elasticity_t_far = 0.0;
    double asymptotic_t_far = 0.0;
    std::vector<double> drift_times;
    std::vector<double> containment_times;

    bool operator==(const VerifyPlan&) const = default;
};

struct ScenarioConfig {
    std::string name = "scenario";
    SolitonSpec spec;
    std::vector<double> times{0.0};
    double y_min = -20.0;
    double y_max = 20.0;
    std::size_t samples = 2000;
    std::set<std::string> outputs{"csv", "svg", "report"};
    VerifyPlan verify;
    std::optional<Perturbation> perturb;

    bool operator==(const ScenarioConfig&) const = default;
};

namespace detail {

using nlohmann::json;

[[noreturn]] inline void invalid(const std::string& path, const std::string& what)
{
    throw Error(ErrorKind::ValidationError, path + ": " + what);
}

inline double number_at(const json& j, const std::string& path)
{
    if (!j.is_number())
        invalid(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v))
        invalid(path, "must be finite");
    return v;
}

inline std::vector<double> numbers_at(const json& j, const std::string& path)
{
    if (!j.is_array())
        invalid(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(number_at(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

inline void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> keys)
{
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; }))
            invalid(path.empty() ? key : path + "." + key, "unknown key");
    }
}

inline const char* target_name(PerturbTarget t)
{
    switch (t) {
    case PerturbTarget::FTilde: return "f_tilde";
    case PerturbTarget::G1: return "g1";
    case PerturbTarget::G2: return "g2";
    case PerturbTarget::H: return "h";
    }
    return "h";
}

inline Perturbation parse_perturbation(const json& j)
{
    if (!j.is_object())
        invalid("perturb", "expected an object");
    reject_unknown(j, "perturb", {"target", "index", "relative"});
    Perturbation p;
    const std::string target = j.value("target", std::string("h"));
    if (target == "f_tilde")
        p.target = PerturbTarget::FTilde;
    else if (target == "g1")
        p.target = PerturbTarget::G1;
    else if (target == "g2")
        p.target = PerturbTarget::G2;
    else if (target == "h")
        p.target = PerturbTarget::H;
    else
        invalid("perturb.target", "expected one of f_tilde, g1, g2, h");
    if (!j.contains("index") || !j["index"].is_array())
        invalid("perturb.index", "expected an array of non-negative integers");
    for (std::size_t i = 0; i < j["index"].size(); ++i) {
        const auto& e = j["index"][i];
        if (!e.is_number_integer() || e.get<int>() < 0)
            invalid("perturb.index[" + std::to_string(i) + "]", "expected a non-negative integer");
        p.index.push_back(e.get<int>());
    }
    if (j.contains("relative"))
        p.relative = number_at(j["relative"], "perturb.relative");
    return p;
}

} // namespace detail

/// Parses and validates a scenario. ParseError for malformed JSON,
/// ValidationError (with the offending field path) for everything else.
inline ScenarioConfig parse_config(const std::string& text)
{
    using nlohmann::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::ParseError, e.what());
    }
    if (!j.is_object())
        throw Error(ErrorKind::ParseError, "top level must be an object");
    detail::reject_unknown(j, "", {"name", "kappa", "modes", "d", "times", "y_range", "samples", "outputs", "verify",
                                   "perturb"});

    ScenarioConfig c;
    if (j.contains("name")) {
        if (!j["name"].is_string() || j["name"].get<std::string>().empty())
            detail::invalid("name", "expected a non-empty string");
        c.name = j["name"].get<std::string>();
        if (c.name.find_first_of("/\\") != std::string::npos)
            detail::invalid("name", "must not contain path separators");
    }
    if (!j.contains("kappa"))
        detail::invalid("kappa", "missing");
    c.spec.kappa = detail::number_at(j["kappa"], "kappa");
    if (!(c.spec.kappa > 0.0))
        detail::invalid("kappa", "must be positive");
    if (!j.contains("modes") || !j["modes"].is_array())
        detail::invalid("modes", "expected an array");
    const auto& modes = j["modes"];
    if (modes.empty() || modes.size() > 2)
        detail::invalid("modes", "one or two modes are supported");
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const std::string path = "modes[" + std::to_string(i) + "]";
        const auto& m = modes[i];
        if (!m.is_object())
            detail::invalid(path, "expected an object");
        detail::reject_unknown(m, path, {"k", "sign", "y0"});
        ModeSpec mode;
        if (!m.contains("k"))
            detail::invalid(path + ".k", "missing");
        mode.k = detail::number_at(m["k"], path + ".k");
        if (!m.contains("sign") || !m["sign"].is_string())
            detail::invalid(path + ".sign", "expected \"+\" or \"-\"");
        const auto sign = m["sign"].get<std::string>();
        if (sign == "+")
            mode.epsilon = Sign::Smooth;
        else if (sign == "-")
            mode.epsilon = Sign::Loop;
        else
            detail::invalid(path + ".sign", "expected \"+\" or \"-\"");
        if (m.contains("y0"))
            mode.y0 = detail::number_at(m["y0"], path + ".y0");
        try {
            classify_mode(c.spec.kappa, mode);
        } catch (const Error& e) {
            detail::invalid(path, e.what());
        }
        c.spec.modes.push_back(mode);
    }
    if (j.contains("d"))
        c.spec.d = detail::number_at(j["d"], "d");
    try {
        validate(c.spec);
    } catch (const Error& e) {
        detail::invalid("modes", e.what());
    }

    if (j.contains("times")) {
        c.times = detail::numbers_at(j["times"], "times");
        if (c.times.empty())
            detail::invalid("times", "needs at least one time");
        if (!std::is_sorted(c.times.begin(), c.times.end()) ||
            std::adjacent_find(c.times.begin(), c.times.end()) != c.times.end())
            detail::invalid("times", "must be strictly increasing");
    }
    if (j.contains("y_range")) {
        const auto r = detail::numbers_at(j["y_range"], "y_range");
        if (r.size() != 2 || !(r[0] < r[1]))
            detail::invalid("y_range", "expected [y_min, y_max] with y_min < y_max");
        c.y_min = r[0];
        c.y_max = r[1];
    }
    if (j.contains("samples")) {
        if (!j["samples"].is_number_integer() || j["samples"].get<long long>() < 2)
            detail::invalid("samples", "expected an integer >= 2");
        c.samples = j["samples"].get<std::size_t>();
    }
    if (j.contains("outputs")) {
        if (!j["outputs"].is_array())
            detail::invalid("outputs", "expected an array");
        c.outputs.clear();
        for (std::size_t i = 0; i < j["outputs"].size(); ++i) {
            const auto& o = j["outputs"][i];
            const std::string path = "outputs[" + std::to_string(i) + "]";
            if (!o.is_string())
                detail::invalid(path, "expected a string");
            const auto s = o.get<std::string>();
            if (s != "csv" && s != "svg" && s != "report")
                detail::invalid(path, "expected one of csv, svg, report");
            c.outputs.insert(s);
        }
    }
    if (j.contains("verify")) {
        const auto& v = j["verify"];
        if (!v.is_object())
            detail::invalid("verify", "expected an object");
        detail::reject_unknown(v, "verify", {"elasticity_t_far", "asymptotic_t_far", "drift_times", "containment_times"});
        if (v.contains("elasticity_t_far"))
            c.verify.elasticity_t_far = detail::number_at(v["elasticity_t_far"], "verify.elasticity_t_far");
        if (v.contains("asymptotic_t_far"))
            c.verify.asymptotic_t_far = detail::number_at(v["asymptotic_t_far"], "verify.asymptotic_t_far");
        if (v.contains("drift_times")) {
            c.verify.drift_times = detail::numbers_at(v["drift_times"], "verify.drift_times");
            if (c.verify.drift_times.size() != 2)
                detail::invalid("verify.drift_times", "expected two times");
        }
        if (v.contains("containment_times"))
            c.verify.containment_times = detail::numbers_at(v["containment_times"], "verify.containment_times");
    }
    if (j.contains("perturb"))
        c.perturb = detail::parse_perturbation(j["perturb"]);
    return c;
}

inline nlohmann::json to_json(const ScenarioConfig& c)
{
    using nlohmann::json;
    json modes = json::array();
    for (const auto& m : c.spec.modes)
        modes.push_back({{"k", m.k}, {"sign", m.epsilon == Sign::Loop ? "-" : "+"}, {"y0", m.y0}});
    json j{{"name", c.name},
           {"kappa", c.spec.kappa},
           {"modes", modes},
           {"d", c.spec.d},
           {"times", c.times},
           {"y_range", {c.y_min, c.y_max}},
           {"samples", c.samples},
           {"outputs", std::vector<std::string>(c.outputs.begin(), c.outputs.end())}};
    json v = json::object();
    if (c.verify.elasticity_t_far > 0.0)
        v["elasticity_t_far"] = c.verify.elasticity_t_far;
    if (c.verify.asymptotic_t_far > 0.0)
        v["asymptotic_t_far"] = c.verify.asymptotic_t_far;
    if (!c.verify.drift_times.empty())
        v["drift_times"] = c.verify.drift_times;
    if (!c.verify.containment_times.empty())
        v["containment_times"] = c.verify.containment_times;
    if (!v.empty())
        j["verify"] = v;
    if (c.perturb)
        j["perturb"] = {{"target", detail::target_name(c.perturb->target)},
                        {"index", c.perturb->index},
                        {"relative", c.perturb->relative}};
    return j;
}

// Presets. fig4/fig5 times bracket the interaction; phase offsets are all zero.
namespace presets {

inline ScenarioConfig make(std::string name, double kappa, std::vector<ModeSpec> modes, std::vector<double> times)
{
    ScenarioConfig c;
    c.name = std::move(name);
    c.spec = SolitonSpec{kappa, std::move(modes), 0.0};
    c.times = std::move(times);
    return c;
}

inline ScenarioConfig fig1()
{
    return make("fig1", 1.1, {{2.1, Sign::Loop, 0.0}}, {-10.0, 0.0, 10.0});
}

inline ScenarioConfig fig2()
{
    auto c = make("fig2", 1.5, {{3.2, Sign::Loop, 0.0}, {3.8, Sign::Loop, 0.0}}, {-10.0, -0.8, 10.0});
    c.verify.elasticity_t_far = 10.0;
    c.verify.asymptotic_t_far = 50.0;
    c.verify.drift_times = {-10.0, -8.0};
    return c;
}

inline ScenarioConfig fig3()
{
    return make("fig3", 2.5, {{3.4, Sign::Loop, 0.0}, {4.8, Sign::Loop, 0.0}}, {-5.0, -1.0, -0.5, -0.25, 1.0, 5.0});
}

inline ScenarioConfig fig4()
{
    auto c = make("fig4", 3.5, {{10.4, Sign::Loop, 0.0}, {4.2, Sign::Loop, 0.0}},
                  {-3.0, -1.0, -0.3, -0.1, 0.1, 0.2, 1.0, 3.0});
    c.verify.containment_times = {-0.3, 0.1, 0.2};
    return c;
}

inline ScenarioConfig fig5()
{
    auto c = make("fig5", 0.91, {{2.6, Sign::Loop, 0.0}, {0.91, Sign::Smooth, 0.0}},
                  {-3.0, -1.0, -0.3, 0.0, 0.3, 1.0, 3.0});
    c.verify.drift_times = {-3.0, -2.0};
    // the smooth mode runs fast; keep its crest in view at t = +-3
    c.y_min = -40.0;
    c.y_max = 40.0;
    c.samples = 4000;
    return c;
}

inline std::vector<std::string> names() { return {"fig1", "fig2", "fig3", "fig4", "fig5"}; }

} // namespace presets

/// fig1..fig5, or all five for "all-figures".
inline std::vector<ScenarioConfig> resolve_preset(const std::string& name)
{
    if (name == "fig1")
        return {presets::fig1()};
    if (name == "fig2")
        return {presets::fig2()};
    if (name == "fig3")
        return {presets::fig3()};
    if (name == "fig4")
        return {presets::fig4()};
    if (name == "fig5")
        return {presets::fig5()};
    if (name == "all-figures")
        return {presets::fig1(), presets::fig2(), presets::fig3(), presets::fig4(), presets::fig5()};
    throw Error(ErrorKind::InvalidArgument, "unknown preset '" + name + "'");
}

inline std::string describe(const ScenarioConfig& c)
{
    std::ostringstream os;
    os << c.name << ": kappa=" << c.spec.kappa;
    for (std::size_t i = 0; i < c.spec.modes.size(); ++i)
        os << " k" << i + 1 << "=" << c.spec.modes[i].k << "(" << (c.spec.modes[i].epsilon == Sign::Loop ? "-" : "+")
           << ")";
    os << " d=" << c.spec.d << " times=[";
    for (std::size_t i = 0; i < c.times.size(); ++i)
        os << (i ? "," : "") << c.times[i];
    os << "]";
    return os.str();
}

// Frame output.

inline std::string format_g17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_csv(std::ostream& out, const std::vector<ParametricCurve<double>>& frames)
{
    out << "t,y,x,u,q\n";
    for (const auto& f : frames)
        for (const auto& s : f.samples)
            out << format_g17(f.t) << ',' << format_g17(s.y) << ',' << format_g17(s.x) << ',' << format_g17(s.u)
                << ',' << format_g17(s.q) << '\n';
}

/// u against x as one polyline in sample order, so loops draw as loops.
inline void write_svg(std::ostream& out, const ParametricCurve<double>& frame, const std::string& title)
{
    constexpr double width = 640.0, height = 400.0, pad = 40.0;
    double x_lo = 0, x_hi = 1, u_lo = 0, u_hi = 1;
    if (!frame.samples.empty()) {
        x_lo = x_hi = frame.samples.front().x;
        u_lo = u_hi = frame.samples.front().u;
        for (const auto& s : frame.samples) {
            x_lo = std::min(x_lo, s.x);
            x_hi = std::max(x_hi, s.x);
            u_lo = std::min(u_lo, s.u);
            u_hi = std::max(u_hi, s.u);
        }
    }
    if (x_hi - x_lo < 1e-12)
        x_hi = x_lo + 1.0;
    if (u_hi - u_lo < 1e-12)
        u_hi = u_lo + 1.0;
    auto px = [&](double x) { return pad + (x - x_lo) / (x_hi - x_lo) * (width - 2 * pad); };
    auto py = [&](double u) { return height - pad - (u - u_lo) / (u_hi - u_lo) * (height - 2 * pad); };
    char buf[64];
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
        << "<title>" << title << "</title>\n"
        << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    if (u_lo < 0.0 && u_hi > 0.0) {
        std::snprintf(buf, sizeof buf, "%.3f", py(0.0));
        out << "<line x1=\"" << pad << "\" y1=\"" << buf << "\" x2=\"" << width - pad << "\" y2=\"" << buf
            << "\" stroke=\"#bbbbbb\" stroke-width=\"1\"/>\n";
    }
    out << "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < frame.samples.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%s%.3f,%.3f", i ? " " : "", px(frame.samples[i].x), py(frame.samples[i].u));
        out << buf;
    }
    out << "\"/>\n";
    std::snprintf(buf, sizeof buf, "t = %g", frame.t);
    out << "<text x=\"" << pad << "\" y=\"" << pad / 2 << "\" font-family=\"sans-serif\" font-size=\"14\">" << buf
        << "</text>\n</svg>\n";
}

inline std::string format_check(const CheckResult& c)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, "CHECK %s residual=%.3e tol=%.1e %s", c.name.c_str(), c.residual, c.tolerance,
                  c.pass ? "PASS" : "FAIL");
    std::string line = buf;
    return line;
}

inline void write_report(std::ostream& out, const VerificationReport& r)
{
    for (const auto& c : r.checks)
        out << format_check(c) << '\n';
}

// Drivers. Exit codes: 0 success, 1 usage or config error, 2 verification
// failure or runtime singularity.

struct RunOptions {
    std::filesystem::path out_dir = ".";
    unsigned workers = 1;
};

inline std::vector<ParametricCurve<double>> solve_frames(const ScenarioConfig& c, unsigned workers)
{
    auto fields = assemble_fields<double>(c.spec);
    if (c.perturb)
        fields = perturbed(fields, *c.perturb);
    std::vector<ParametricCurve<double>> frames;
    for (double t : c.times)
        frames.push_back(sample_frame(fields, t, c.y_min, c.y_max, c.samples, workers));
    return frames;
}

inline void write_file(const std::filesystem::path& p, const std::string& content)
{
    std::ofstream out(p, std::ios::binary);
    if (!out)
        throw Error(ErrorKind::IoError, "cannot write " + p.string());
    out << content;
    if (!out)
        throw Error(ErrorKind::IoError, "write failed for " + p.string());
}

inline int run_solve(const std::vector<ScenarioConfig>& configs, const RunOptions& opt, std::ostream& log,
                     std::ostream& err)
{
    try {
        std::filesystem::create_directories(opt.out_dir);
        for (const auto& c : configs) {
            const auto frames = solve_frames(c, opt.workers);
            if (c.outputs.count("csv")) {
                std::ostringstream csv;
                write_csv(csv, frames);
                write_file(opt.out_dir / (c.name + ".csv"), csv.str());
                log << "wrote " << (opt.out_dir / (c.name + ".csv")).string() << '\n';
            }
            if (c.outputs.count("svg"))
                for (std::size_t i = 0; i < frames.size(); ++i) {
                    std::ostringstream svg;
                    write_svg(svg, frames[i], c.name);
                    const auto path = opt.out_dir / (c.name + "_t" + std::to_string(i) + ".svg");
                    write_file(path, svg.str());
                    log << "wrote " << path.string() << '\n';
                }
        }
    } catch (const Error& e) {
        err << e.what() << '\n';
        switch (e.kind()) {
        case ErrorKind::MapSingularity:
        case ErrorKind::SingularIntegrand:
        case ErrorKind::Overflow:
        case ErrorKind::ZeroDenominator:
            return 2;
        default:
            return 1;
        }
    } catch (const std::filesystem::filesystem_error& e) {
        err << "IoError: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

/// The suite options a scenario implies: its grid, times and extra diagnostics.
inline SuiteOptions suite_options(const ScenarioConfig& c)
{
    SuiteOptions o;
    o.grid.y_min = c.y_min;
    o.grid.y_max = c.y_max;
    o.grid.n_y = 400;
    o.grid.times = c.times;
    o.elasticity_t_far = c.verify.elasticity_t_far;
    o.asymptotic_t_far = c.verify.asymptotic_t_far;
    o.drift_times = c.verify.drift_times;
    o.containment_times = c.verify.containment_times;
    if (c.perturb)
        o.perturbations.push_back(*c.perturb);
    o.label = c.name;
    return o;
}

inline int run_verify(const std::vector<ScenarioConfig>& configs, const RunOptions& opt, std::ostream& log,
                      std::ostream& err)
{
    VerificationReport all;
    try {
        for (const auto& c : configs)
            all.append(run_suite(c.spec, suite_options(c)));
        std::ostringstream text;
        write_report(text, all);
        std::filesystem::create_directories(opt.out_dir);
        const std::string stem = configs.size() == 1 ? configs.front().name : std::string("all-figures");
        write_file(opt.out_dir / (stem + "_report.txt"), text.str());
        log << text.str();
    } catch (const Error& e) {
        err << e.what() << '\n';
        return e.kind() == ErrorKind::IoError || e.kind() == ErrorKind::InvalidArgument ? 1 : 2;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "IoError: " << e.what() << '\n';
        return 1;
    }
    return all.all_passed() ? 0 : 2;
}

} // namespace dpsol
