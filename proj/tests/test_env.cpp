#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "dncb/env.hpp"

using namespace dncb;

namespace
{

DriftModel fixed(std::vector<std::vector<double>> init, DriftKind kind = DriftKind::kConstant, double step = 0.0)
{
    DriftModel m;
    m.kind = kind;
    m.step = step;
    m.init = std::move(init);
    return m;
}

} // namespace

TEST_CASE("constant drift holds the initial means")
{
    const auto env = generate_trajectory(fixed({{0.9, 0.1}}), Dimensions{1, 2, 5}, 1, 0.0);
    for (Time t = 1; t <= 5; ++t)
    {
        CHECK(env.mean(0, 0, t) == 0.9);
        CHECK(env.mean(0, 1, t) == 0.1);
    }
}

TEST_CASE("random walk with zero step equals its initialization")
{
    const auto env =
        generate_trajectory(fixed({{0.3, 0.6, 0.2}}, DriftKind::kRandomWalk, 0.0), Dimensions{1, 3, 200}, 9, 0.0);
    for (Time t = 1; t <= 200; ++t)
        for (Arm a = 0; a < 3; ++a)
            CHECK(env.mean(0, a, t) == env.mean(0, a, 1));
}

TEST_CASE("random walk respects the drift bound and the unit interval")
{
    DriftModel m;
    m.kind = DriftKind::kRandomWalk;
    m.step = 0.001;
    const Dimensions dims{2, 3, 10000};
    for (std::uint64_t seed : {1u, 2u, 77u})
    {
        const auto env = generate_trajectory(m, dims, seed, 0.0);
        double max_step = 0.0;
        bool in_range = true;
        for (int j = 0; j < dims.agents; ++j)
            for (Arm a = 0; a < dims.arms; ++a)
                for (Time t = 1; t <= dims.horizon; ++t)
                {
                    const double v = env.mean(j, a, t);
                    in_range &= v >= 0.0 && v <= 1.0;
                    if (t > 1)
                        max_step = std::max(max_step, std::abs(v - env.mean(j, a, t - 1)));
                }
        CHECK(in_range);
        CHECK(max_step <= 0.001 * (1 + 1e-9));
        CHECK(max_step >= 0.001 * (1 - 1e-9));
    }
}

TEST_CASE("stable match examples")
{
    const auto distinct = generate_trajectory(fixed({{0.9, 0.1}, {0.8, 0.2}}), Dimensions{2, 2, 1}, 1, 0.0);
    CHECK(stable_match(distinct, 1) == std::vector<Arm>{0, 1});
    const auto contested = generate_trajectory(fixed({{0.9, 0.1}, {0.95, 0.2}}), Dimensions{2, 2, 1}, 1, 0.0);
    CHECK(stable_match(contested, 1) == std::vector<Arm>{0, 1});
}

TEST_CASE("stable match agrees with a greedy brute force on random 3x5 instances")
{
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int c = 0; c < 200; ++c)
    {
        std::vector<std::vector<double>> mu(3, std::vector<double>(5));
        for (auto& row : mu)
            for (auto& v : row)
                v = u(rng);
        const auto env = generate_trajectory(fixed(mu), Dimensions{3, 5, 1}, 1, 0.0);
        std::vector<Arm> expect;
        std::vector<bool> taken(5, false);
        for (const auto& row : mu)
        {
            Arm best = -1;
            for (Arm a = 0; a < 5; ++a)
                if (!taken[static_cast<std::size_t>(a)] && (best < 0 || row[static_cast<std::size_t>(a)] >
                                                                           row[static_cast<std::size_t>(best)]))
                    best = a;
            taken[static_cast<std::size_t>(best)] = true;
            expect.push_back(best);
        }
        CHECK(stable_match(env, 1) == expect);
    }
}

TEST_CASE("rewards: exact without noise, unbiased with noise")
{
    const auto exact = generate_trajectory(fixed({{0.7, 0.2}}), Dimensions{1, 2, 3}, 1, 0.0);
    RewardRng rng(5);
    CHECK(sample_reward(exact, 0, 0, 2, rng) == 0.7);

    const double sigma = std::sqrt(0.4);
    const auto noisy = generate_trajectory(fixed({{0.7, 0.2}}), Dimensions{1, 2, 3}, 1, sigma);
    double sum = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i)
        sum += sample_reward(noisy, 0, 0, 2, rng);
    CHECK(std::abs(sum / n - 0.7) <= 3.0 * sigma / 1000.0);
}

TEST_CASE("dimension checks")
{
    CHECK_THROWS_AS(generate_trajectory(DriftModel{}, Dimensions{3, 2, 10}, 1, 0.0), ConfigError);
    DriftModel big;
    big.step = 1.5;
    CHECK_THROWS_AS(generate_trajectory(big, Dimensions{1, 2, 10}, 1, 0.0), ConfigError);
    const auto env = generate_trajectory(DriftModel{}, Dimensions{1, 2, 10}, 1, 0.0);
    CHECK_THROWS(env.mean(0, 0, 11));
}

TEST_CASE("same seed gives the same trajectory; csv round trip is exact")
{
    DriftModel m;
    m.step = 0.01;
    const auto a = generate_trajectory(m, Dimensions{2, 3, 50}, 12, 0.1);
    const auto b = generate_trajectory(m, Dimensions{2, 3, 50}, 12, 0.1);
    std::ostringstream sa, sb;
    write_trajectory_csv(sa, a);
    write_trajectory_csv(sb, b);
    CHECK(sa.str() == sb.str());

    std::istringstream in(sa.str());
    const auto back = read_trajectory_csv(in, 0.1);
    for (int j = 0; j < 2; ++j)
        for (Arm x = 0; x < 3; ++x)
            for (Time t = 1; t <= 50; ++t)
                CHECK(back.mean(j, x, t) == a.mean(j, x, t));
}
