#include "support.hpp"

using namespace dpsol;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using testing::error_kind_of;

TEST_CASE("one-loop trough depth", "[fields]")
{
    const auto f = assemble_fields<double>(testing::fig1());
    // y = 0, t = 0 is xi = 0
    CHECK_THAT(f.u(0.0, 0.0), WithinRel(-1.5130378608903559, 1e-13));
    const auto wide = assemble_fields<long double>(testing::fig1());
    CHECK_THAT(static_cast<double>(wide.u(0.0L, 0.0L)), WithinRel(-1.5130378608903559, 1e-15));
}

TEST_CASE("background far from the solitons", "[fields]")
{
    for (const auto& c : testing::figures()) {
        const auto f = assemble_fields<double>(c.spec);
        for (double y : {-80.0, 80.0}) {
            CHECK_THAT(f.u(y, 0.0), WithinAbs(0.0, 1e-12));
            CHECK_THAT(f.q(y, 0.0), WithinRel(c.spec.kappa, 1e-12));
        }
    }
}

TEST_CASE("one-loop coordinate map", "[fields]")
{
    const auto spec = testing::fig1();
    const auto f = assemble_fields<double>(spec);
    const double kappa = spec.kappa;
    const double alpha = one_loop_alpha(f.model.modes[0].a);
    CHECK_THAT(alpha, WithinRel(0.71127541038881594, 1e-14));
    CHECK_THAT(x_closed(f, 0.0, 0.0), WithinAbs(0.0, 1e-15));
    CHECK_THAT(x_closed(f, -40.0, 0.0) + 40.0 / kappa, WithinRel(1.7795209688972564, 1e-12));
    CHECK_THAT(x_closed(f, 40.0, 0.0) - 40.0 / kappa, WithinRel(-1.7795209688972564, 1e-12));
    CHECK(error_kind_of([] { one_loop_alpha(0.5); }) == ErrorKind::MapSingularity);
}

TEST_CASE("one-loop symmetry in xi", "[fields]")
{
    const auto f = assemble_fields<double>(testing::fig1());
    const double kappa = 1.1, t = 0.0;
    for (double y : {0.1, 0.5, 1.3, 2.7, 6.0}) {
        CHECK_THAT(f.u(y, t), WithinRel(f.u(-y, t), 1e-10));
        CHECK_THAT(x_closed(f, y, t) - y / kappa, WithinAbs(-(x_closed(f, -y, t) + y / kappa), 1e-10));
    }
}

TEST_CASE("quadrature agrees with the closed map up to a constant", "[fields]")
{
    const auto f = assemble_fields<double>(testing::fig2());
    const double offset = x_closed(f, -15.0, 0.5) - x_quadrature(f, -15.0, 0.5);
    for (double y = -15.0; y <= 15.0; y += 0.75)
        CHECK_THAT(x_closed(f, y, 0.5) - x_quadrature(f, y, 0.5), WithinAbs(offset, 1e-5));

    const auto one = assemble_fields<double>(testing::fig1());
    for (double y : {-3.0, -0.4, 0.0, 0.9, 4.0})
        CHECK_THAT(x_closed(one, y, 0.0) - x_quadrature(one, y, 0.0), WithinAbs(1.7795209688972564, 1e-6));
}

TEST_CASE("quadrature truncation", "[fields]")
{
    const auto f = assemble_fields<double>(testing::fig2());
    for (double y : {-2.0, 0.0, 3.0})
        CHECK_THAT(x_quadrature(f, y, 0.0, 40.0), WithinAbs(x_quadrature(f, y, 0.0, 60.0), 1e-12));
    // below the cutoff the integrand is negligible
    const double lo = quadrature_lower_limit(f, 0.0, 40.0);
    CHECK(std::abs(f.x_integrand(lo, 0.0)) < 1e-14);
}

TEST_CASE("one-loop frame anatomy", "[fields]")
{
    const auto f = assemble_fields<double>(testing::fig1());
    const auto curve = sample_frame(f, 0.0, -20.0, 20.0, 2001);
    CHECK(curve.loop_count == 1);
    CHECK(curve.sign_changes == 2);
    CHECK_FALSE(curve.singular);
    for (const auto& s : curve.samples)
        CHECK(s.u <= 0.0);
    const auto troughs = trough_positions(f, curve);
    REQUIRE(troughs.size() == 1);
    // a flat minimum is only located to about sqrt(eps)
    CHECK_THAT(troughs[0].y, WithinAbs(0.0, 1e-7));
    CHECK_THAT(troughs[0].u, WithinRel(f.u(0.0, 0.0), 1e-14));
    CHECK(crest_positions(f, curve).empty());

    // dx/dy = 1/q is negative exactly between the two poles of q
    std::size_t negative_run = 0;
    for (std::size_t i = 1; i + 1 < curve.samples.size(); ++i) {
        const double dx = curve.samples[i + 1].x - curve.samples[i - 1].x;
        if (curve.samples[i - 1].q < 0 && curve.samples[i].q < 0 && curve.samples[i + 1].q < 0) {
            CHECK(dx < 0.0);
            ++negative_run;
        }
        if (curve.samples[i - 1].q > 0 && curve.samples[i].q > 0 && curve.samples[i + 1].q > 0)
            CHECK(dx > 0.0);
    }
    CHECK(negative_run > 0);
}

TEST_CASE("two-loop frame well before the collision", "[fields]")
{
    const auto f = assemble_fields<double>(testing::fig2());
    const auto curve = sample_frame(f, -10.0, -20.0, 20.0, 4001);
    CHECK(curve.loop_count == 2);
    CHECK(trough_positions(f, curve).size() == 2);
    CHECK(loop_x_extents(curve).size() == 2);
}

TEST_CASE("degenerate two-point frame", "[fields]")
{
    const auto f = assemble_fields<double>(testing::fig1());
    const auto curve = sample_frame(f, 0.0, -20.0, 20.0, 2);
    CHECK(curve.samples.size() == 2);
    CHECK(curve.loop_count == 0);
    CHECK(trough_positions(f, curve).empty());
    CHECK(error_kind_of([&] { sample_frame(f, 0.0, -20.0, 20.0, 1); }) == ErrorKind::InvalidArgument);
    CHECK(error_kind_of([&] { sample_frame(f, 0.0, 1.0, 1.0, 10); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("frames do not depend on the worker count", "[fields]")
{
    const auto f = assemble_fields<double>(testing::fig2());
    const auto a = sample_frame(f, -0.8, -20.0, 20.0, 997, 1);
    for (unsigned w : {2u, 3u, 8u}) {
        const auto b = sample_frame(f, -0.8, -20.0, 20.0, 997, w);
        REQUIRE(b.samples.size() == a.samples.size());
        for (std::size_t i = 0; i < a.samples.size(); ++i) {
            CHECK(a.samples[i].x == b.samples[i].x);
            CHECK(a.samples[i].u == b.samples[i].u);
            CHECK(a.samples[i].q == b.samples[i].q);
        }
    }
}

TEST_CASE("one-mode frames translate with the velocity", "[fields]")
{
    auto spec = testing::fig1();
    const auto f0 = assemble_fields<double>(spec);
    const double dt = 1.7, c = f0.model.modes[0].c;
    spec.modes[0].y0 += c * dt;
    const auto f1 = assemble_fields<double>(spec);
    const auto a = sample_frame(f0, 2.0, -20.0, 20.0, 401);
    const auto b = sample_frame(f1, 2.0 + dt, -20.0, 20.0, 401);
    const double shift = a.samples[0].x - b.samples[0].x;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        CHECK_THAT(b.samples[i].u, WithinAbs(a.samples[i].u, 1e-10));
        CHECK_THAT(b.samples[i].x + shift, WithinAbs(a.samples[i].x, 1e-10));
    }
}

TEST_CASE("q never vanishes and the perfect square holds", "[fields]")
{
    for (const auto& c : testing::figures()) {
        const auto f = assemble_fields<double>(c.spec);
        const auto mixed = log_mixed_derivative(f.f);
        const double k2 = c.spec.kappa * c.spec.kappa;
        for (double t : c.times)
            for (double y = -20.0; y <= 20.0; y += 0.1) {
                const auto g = f.g.eval_scaled(y, t);
                CHECK(std::abs(g.mantissa) > 1e-8 * g.magnitude);
                CHECK(k2 - mixed(y, t) >= 0.0);
            }
    }
}

TEST_CASE("the q-route and the closed form give the same u", "[fields]")
{
    for (const auto& c : testing::figures()) {
        const auto f = assemble_fields<double>(c.spec);
        const auto piped = u_pipeline(f);
        // away from poles of q both routes are well conditioned
        for (double y : {-12.0, -6.0, 7.5, 13.0})
            CHECK_THAT(piped(y, 0.0), WithinAbs(f.u(y, 0.0), 1e-9 * c.spec.kappa * c.spec.kappa * c.spec.kappa));
    }
}

TEST_CASE("a small loop travels inside a large one", "[fields]")
{
    const auto cfg = presets::fig4();
    const auto f = assemble_fields<double>(cfg.spec);
    for (double t : cfg.verify.containment_times) {
        auto loops = loop_x_extents(sample_frame(f, t, -20.0, 20.0, 8001));
        REQUIRE(loops.size() == 2);
        if (loops[0].width() < loops[1].width())
            std::swap(loops[0], loops[1]);
        CHECK(loops[0].contains(loops[1]));
    }
    // well apart, the extents are disjoint
    auto apart = loop_x_extents(sample_frame(f, -3.0, -20.0, 20.0, 8001));
    REQUIRE(apart.size() == 2);
    CHECK((apart[0].hi < apart[1].lo || apart[1].hi < apart[0].lo));
}

TEST_CASE("mixed solution: loop trough and smooth crest", "[fields]")
{
    const auto f = assemble_fields<double>(testing::fig5());
    // the crest sits near y = -20 at t = -3, so follow the modes
    const auto frame = frame_features(f, -3.0);
    CHECK(frame.curve.sign_changes == 2);
    CHECK(frame.troughs.size() == 1);
    CHECK(frame.crests.size() == 1);
    CHECK(frame.crests.front().y < -20.0);
}

TEST_CASE("smooth-only solutions", "[fields]")
{
    const SolitonSpec one{0.91, {{0.91, Sign::Smooth, 0.0}}, 0.0};
    const auto f = assemble_fields<double>(one);
    const auto curve = sample_frame(f, 0.0, -20.0, 20.0, 2001);
    CHECK(curve.sign_changes == 0);
    CHECK(crest_positions(f, curve).size() == 1);
    CHECK(f.u(0.0, 0.0) > 0.0);
    // the map is monotone
    for (std::size_t i = 1; i < curve.samples.size(); ++i)
        CHECK(curve.samples[i].x > curve.samples[i - 1].x);
}
