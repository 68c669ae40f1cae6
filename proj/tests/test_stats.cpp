#include <doctest.h>

#include <cmath>
#include <limits>

#include "dncb/env.hpp"
#include "dncb/stats.hpp"

using namespace dncb;
using namespace dncb::stats;

namespace
{

EnvironmentTrajectory constant_env(std::vector<double> means, Time horizon)
{
    DriftModel m;
    m.kind = DriftKind::kConstant;
    m.init = {std::move(means)};
    const int k = static_cast<int>(m.init[0].size());
    return generate_trajectory(m, Dimensions{1, k, horizon}, 1, 0.0);
}

} // namespace

TEST_CASE("windowed mean")
{
    PullHistory h(1);
    h.record(0, 1, 0.2);
    h.record(0, 2, 0.4);
    h.record(0, 3, 0.6);
    CHECK(*h.windowed_mean(0, 2) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(!h.windowed_mean(0, 4));
    CHECK(!h.windowed_mean(0, 0));
    // Pulls before `first` are not available.
    CHECK(!h.windowed_mean(0, 2, 2));
    CHECK(*h.windowed_mean(0, 1, 2) == doctest::Approx(0.6));

    PullHistory c(1);
    for (Time t = 1; t <= 50; ++t)
        c.record(0, t, 0.37);
    for (std::size_t w : {1u, 7u, 50u})
        CHECK(*c.windowed_mean(0, w) == doctest::Approx(0.37).epsilon(1e-15));
}

TEST_CASE("windowed mean of a drifting noise-free arm equals the means slice")
{
    DriftModel m;
    m.step = 0.01;
    const auto env = generate_trajectory(m, Dimensions{1, 1, 1000}, 3, 0.0);
    PullHistory h(1);
    for (Time t = 1; t <= 1000; ++t)
        h.record(0, t, env.mean(0, 0, t));
    for (std::size_t w : {1u, 10u, 333u, 1000u})
    {
        double s = 0.0;
        for (Time t = 1000 - static_cast<Time>(w) + 1; t <= 1000; ++t)
            s += env.mean(0, 0, t);
        CHECK(*h.windowed_mean(0, w) == doctest::Approx(s / static_cast<double>(w)).epsilon(1e-12));
    }
}

TEST_CASE("optimality test: identical arms never succeed")
{
    PullHistory h(3);
    for (Time t = 1; t <= 3000; ++t)
    {
        h.record(static_cast<Arm>((t - 1) % 3), t, 0.5);
        CHECK(!optimality_test(h, ArmSet::all(3), t, 10000, 0.001, TestParams{}));
    }
}

TEST_CASE("optimality test: threshold window for a 0.8 gap")
{
    const double delta = 0.001;
    const Time horizon = 10000;
    // Smallest grid window with 0.8 > 4 sqrt(2 ln T / w) - delta, by direct evaluation.
    std::size_t expect = 0;
    for (std::size_t w = 1; expect == 0; w *= 2)
        if (0.8 > 4.0 * std::sqrt(2.0 * std::log(10000.0) / static_cast<double>(w)) - delta)
            expect = w;
    REQUIRE(expect == 512);

    for (bool swapped : {false, true})
    {
        const double m0 = swapped ? 0.1 : 0.9;
        const double m1 = swapped ? 0.9 : 0.1;
        PullHistory h(2);
        std::optional<TestOutcome> out;
        Time t = 1;
        for (; t <= horizon && !out; ++t)
        {
            const Arm a = static_cast<Arm>((t - 1) % 2);
            h.record(a, t, a == 0 ? m0 : m1);
            out = optimality_test(h, ArmSet::all(2), t, horizon, delta, TestParams{});
        }
        REQUIRE(out);
        CHECK(out->window == expect);
        CHECK(out->winner == (swapped ? 1 : 0));
        CHECK(t - 1 == 2 * static_cast<Time>(expect));
    }
}

TEST_CASE("optimality test rejects a single candidate")
{
    PullHistory h(2);
    h.record(0, 1, 1.0);
    CHECK_THROWS_AS(optimality_test(h, ArmSet::single(0), 1, 100, 0.0, TestParams{}), DegenerateSetError);
}

TEST_CASE("buffer length")
{
    CHECK(buffer_length(100.0, 3, 0.01, 1000) == doctest::Approx(200.0 * std::sqrt(3.0 * std::log(1000.0) / 100.0)));
    CHECK(buffer_length(100.0, 3, 0.01, 1000) == doctest::Approx(91.05).epsilon(1e-3));
    CHECK(buffer_length(10.0, 3, 0.01, 1000) == doctest::Approx(287.9).epsilon(1e-3));
    CHECK(buffer_length(10.0, 3, 0.0, 1000) == std::numeric_limits<double>::infinity());
    // Quadrupling the exploration time halves the buffer.
    CHECK(buffer_length(400.0, 3, 0.01, 1000) == doctest::Approx(buffer_length(100.0, 3, 0.01, 1000) / 2));
}

TEST_CASE("confidence radius")
{
    CHECK(confidence_radius(8.0, 1000) == doctest::Approx(std::sqrt(2.0 * std::log(1000.0) / 8.0)));
    CHECK(confidence_radius(8.0, 1000, RadiusRule::kGoodEvent) ==
          doctest::Approx(2.0 * confidence_radius(8.0, 1000)));
}

TEST_CASE("dynamic gap: constant 0.3 pairwise gap")
{
    const Time horizon = 10000;
    const auto env = constant_env({0.1, 0.4, 0.7}, horizon);
    GapCalculator calc(env, 0, GapCalculator::Params{});
    CHECK(std::abs(calc.lambda(ArmSet{}, horizon) - 0.3) <= 1e-3 + 1e-12);
    // Removing the middle arm doubles the smallest gap.
    CHECK(std::abs(calc.lambda(ArmSet::single(1), horizon) - 0.6) <= 1e-3 + 1e-12);
}

TEST_CASE("dynamic gap falls back when no window fits")
{
    const Time horizon = 10000;
    const auto env = constant_env({0.5, 0.5, 0.5}, horizon);
    GapCalculator::Params p;
    GapCalculator calc(env, 0, p);
    const Time t = 20; // below c0 log T, the window at lambda = 1
    CHECK(calc.lambda(ArmSet{}, t) == doctest::Approx(p.c1 * 3 * std::log(10000.0) / 20.0));
    CHECK(calc.lambda(ArmSet::single(2), t) == doctest::Approx(p.c1 * 2 * std::log(10000.0) / 20.0));
}

TEST_CASE("gap block length")
{
    CHECK(GapCalculator::block_length(0.0, 4, 1000) == 1000);
    const double expect = std::pow(1e-3, -2.0 / 3) * std::cbrt(4.0) * std::cbrt(std::log(1e6));
    CHECK(std::abs(static_cast<double>(GapCalculator::block_length(1e-3, 4, 1000000)) - expect) <= 1.0);
}
