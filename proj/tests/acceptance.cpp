// Acceptance suite: one PASS/FAIL line per primary criterion.
//
// Oracles here are written independently of the library code they check.
// Exit status is the number of failed criteria (capped at 1 for ctest).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dncb/baselines.hpp"
#include "dncb/config.hpp"
#include "dncb/diagnostics.hpp"
#include "dncb/harness.hpp"
#include "dncb/sim.hpp"
#include "dncb/stats.hpp"

#ifndef DNCB_CONFIG_DIR
#define DNCB_CONFIG_DIR "configs"
#endif

using namespace dncb;

namespace
{

struct Verdict
{
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(const char* name, double budget_seconds, const std::function<Verdict()>& body)
{
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try
    {
        v = body();
    }
    catch (const std::exception& e)
    {
        v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget_seconds > 0 && secs > budget_seconds)
    {
        v.pass = false;
        char buf[96];
        std::snprintf(buf, sizeof buf, "; runtime %.1f s over budget %.0f s", secs, budget_seconds);
        v.detail += buf;
    }
    failures += v.pass ? 0 : 1;
    std::printf("%s %-28s %7.2f s  %s\n", v.pass ? "PASS" : "FAIL", name, secs, v.detail.c_str());
    std::fflush(stdout);
}

ExperimentConfig config(const char* name)
{
    return load_config(std::string(DNCB_CONFIG_DIR) + "/" + name);
}

EpisodeResult episode(const ExperimentConfig& cfg, AlgorithmKind kind, std::uint64_t seed, bool views = false)
{
    const auto env = generate_trajectory(cfg.drift, cfg.dims, seed, cfg.noise_sigma);
    EpisodeOptions opts = cfg.episode;
    opts.record_views = views;
    return run_episode(env, make_policy_factory(cfg, kind), opts, seed);
}

std::string join(const std::vector<double>& v)
{
    std::string s;
    char buf[32];
    for (std::size_t i = 0; i < v.size(); ++i)
    {
        std::snprintf(buf, sizeof buf, "%s%.0f", i ? "/" : "", v[i]);
        s += buf;
    }
    return s;
}

// Random means tensor with the given shape and constant-in-time values.
EnvironmentTrajectory random_env(std::mt19937_64& rng, int n, int k, Time horizon)
{
    DriftModel model;
    model.kind = DriftKind::kConstant;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    model.init.assign(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(k)));
    for (auto& row : model.init)
        for (auto& v : row)
            v = u(rng);
    return generate_trajectory(model, Dimensions{n, k, horizon}, rng(), 0.0);
}

// Each rank in turn takes its best remaining arm, lowest index on ties.
std::vector<Arm> brute_force_match(const std::vector<std::vector<double>>& mu)
{
    std::vector<bool> used(mu.front().size(), false);
    std::vector<Arm> out;
    for (const auto& row : mu)
    {
        int best = -1;
        for (std::size_t a = 0; a < row.size(); ++a)
            if (!used[a] && (best < 0 || row[a] > row[static_cast<std::size_t>(best)]))
                best = static_cast<int>(a);
        used[static_cast<std::size_t>(best)] = true;
        out.push_back(best);
    }
    return out;
}

struct DummyPolicy final : Policy
{
    void start(Rank) override {}
    void begin_round(Time, const DominatedView&) override {}
    Arm choose_arm(Time) override { return 0; }
    void observe(const Feedback&) override {}
    void end_round(Time) override {}
    StateTag state() const override { return StateTag::kIndex; }
};

} // namespace

int main()
{
    std::printf("acceptance: DNCB_WORKERS=%d\n", worker_count());

    criterion("rank_estimation", 1.0, [] {
        std::mt19937_64 rng(20240601);
        int wrong = 0;
        for (int c = 0; c < 200; ++c)
        {
            const int n = std::uniform_int_distribution<int>(1, 6)(rng);
            const int k = std::uniform_int_distribution<int>(n, 10)(rng);
            const auto env = random_env(rng, n, k, n);
            const auto res = run_episode(
                env, [](int) { return std::make_unique<DummyPolicy>(); }, EpisodeOptions{}, rng());
            for (int j = 0; j < n; ++j)
            {
                wrong += res.learned_rank[static_cast<std::size_t>(j)] != j + 1;
                // Estimation occupies exactly rounds 1..N-1.
                for (Time t = 1; t <= n; ++t)
                    wrong += (res.trace.state[res.trace.row(t, j)] == StateTag::kRankEstimation) != (t <= n - 1);
            }
        }
        return Verdict{wrong == 0, "200 configs N<=6 k<=10, mismatches " + std::to_string(wrong)};
    });

    criterion("hierarchy_invariant", 120.0, [] {
        const auto cfg = config("hierarchy.json");
        std::int64_t violations = 0;
        std::int64_t exploit_rows = 0;
        for (int i = 0; i < cfg.runs; ++i)
        {
            const auto ep = episode(cfg, AlgorithmKind::kDncb, cfg.base_seed + static_cast<std::uint64_t>(i));
            violations += static_cast<std::int64_t>(hierarchy_violations(ep.trace, 0).size());
            exploit_rows += std::count(ep.trace.state.begin(), ep.trace.state.end(), StateTag::kExploit);
        }
        return Verdict{violations == 0 && exploit_rows > 0,
                       std::to_string(cfg.runs) + " runs N=3 k=4 T=1e5 delta=1e-4, violations " +
                           std::to_string(violations) + ", exploit rows " + std::to_string(exploit_rows)};
    });

    criterion("lemma3_zero_exploit_regret", 60.0, [] {
        auto cfg = config("hierarchy.json");
        cfg.noise_sigma = 0.0;
        double worst = 0.0;
        std::int64_t exploit_rows = 0;
        for (int i = 0; i < 20; ++i)
        {
            const auto ep = episode(cfg, AlgorithmKind::kDncb, cfg.base_seed + static_cast<std::uint64_t>(i));
            for (double r : exploit_regret(ep.trace))
                worst = std::max(worst, std::abs(r));
            exploit_rows += std::count(ep.trace.state.begin(), ep.trace.state.end(), StateTag::kExploit);
        }
        char buf[160];
        std::snprintf(buf, sizeof buf, "20 noise-free runs, max |exploit regret| %.3g over %lld exploit rows", worst,
                      static_cast<long long>(exploit_rows));
        return Verdict{worst == 0.0 && exploit_rows > 0, buf};
    });

    criterion("stable_match_oracle", 0.0, [] {
        std::mt19937_64 rng(7);
        int mismatches = 0;
        for (int c = 0; c < 10000; ++c)
        {
            const int n = std::uniform_int_distribution<int>(1, 5)(rng);
            const int k = std::uniform_int_distribution<int>(n, 8)(rng);
            const auto env = random_env(rng, n, k, 1);
            std::vector<std::vector<double>> mu(static_cast<std::size_t>(n));
            for (int j = 0; j < n; ++j)
                for (Arm a = 0; a < k; ++a)
                    mu[static_cast<std::size_t>(j)].push_back(env.mean(j, a, 1));
            mismatches += stable_match(env, 1) != brute_force_match(mu);
        }
        return Verdict{mismatches == 0, "1e4 instances N<=5 k<=8, mismatches " + std::to_string(mismatches)};
    });

    criterion("matching_resolution_oracle", 0.0, [] {
        std::mt19937_64 rng(11);
        int mismatches = 0;
        for (int c = 0; c < 10000; ++c)
        {
            const int n = std::uniform_int_distribution<int>(1, 6)(rng);
            const int k = std::uniform_int_distribution<int>(n, 10)(rng);
            const auto env = random_env(rng, n, k, 1);
            RewardStreams streams(rng(), n, k);
            std::vector<Arm> proposals(static_cast<std::size_t>(n));
            for (auto& p : proposals)
                p = std::uniform_int_distribution<int>(0, k - 1)(rng);
            const auto out = resolve_round(proposals, 1, env, streams);
            // Per-arm reduction: the minimum rank among proposers of each arm.
            for (int j = 0; j < n; ++j)
            {
                Rank min_rank = n + 1;
                for (int i = 0; i < n; ++i)
                    if (proposals[static_cast<std::size_t>(i)] == proposals[static_cast<std::size_t>(j)])
                        min_rank = std::min(min_rank, i + 1);
                const bool should_match = min_rank == j + 1;
                const auto ju = static_cast<std::size_t>(j);
                mismatches += out.matched[ju] != should_match || out.winner[ju] != min_rank ||
                              (!should_match && out.rewards[ju] != 0.0);
            }
        }
        return Verdict{mismatches == 0, "1e4 proposal vectors, mismatches " + std::to_string(mismatches)};
    });

    criterion("sublinearity", 0.0, [] {
        const auto big = config("default_random_walk.json");
        auto small = big;
        small.dims.horizon = big.dims.horizon / 10;
        const auto r_big = run_experiment(big, AlgorithmKind::kDncb).median_final_regret();
        const auto r_small = run_experiment(small, AlgorithmKind::kDncb).median_final_regret();
        bool ok = true;
        std::string detail = "R(T)/T vs R(T/10)/(T/10) per rank:";
        for (std::size_t j = 0; j < r_big.size(); ++j)
        {
            const double a = r_big[j] / static_cast<double>(big.dims.horizon);
            const double b = r_small[j] / static_cast<double>(small.dims.horizon);
            ok &= a <= 0.5 * b;
            char buf[64];
            std::snprintf(buf, sizeof buf, " %.4f/%.4f", a, b);
            detail += buf;
        }
        return Verdict{ok, detail + " (need <= 0.5x)"};
    });

    criterion("fig2de_dncb_vs_ucb_d3", 300.0, [] {
        const auto cfg = config("fig2de_dncb_vs_ucbd3.json");
        const auto results = compare_algorithms(cfg);
        const auto dncb = results.at(0).median_final_regret();
        const auto d3 = results.at(1).median_final_regret();
        const bool ok = dncb.at(1) < d3.at(1) && dncb.at(2) < d3.at(2);
        return Verdict{ok, "median final regret dncb " + join(dncb) + " vs ucb_d3 " + join(d3) + " (ranks 2,3)"};
    });

    criterion("fig2a_snoozeit_vs_ucb", 0.0, [] {
        const auto cfg = config("fig2a_snoozeit_vs_ucb.json");
        const auto results = compare_algorithms(cfg);
        const auto snooze = results.at(0).median_final_regret();
        const auto ucb = results.at(1).median_final_regret();
        return Verdict{snooze.at(0) < ucb.at(0), "median final regret snoozeit " + join(snooze) + " vs ucb " +
                                                     join(ucb)};
    });

    criterion("board_inference_equivalence", 0.0, [] {
        std::string detail;
        bool ok = true;
        for (const char* name : {"collision_n2.json", "collision_n3.json"})
        {
            const auto cfg = config(name);
            const auto check = effective_drift_check(cfg.drift.step, cfg.algorithm.delta, cfg.dims.arms,
                                                     cfg.episode.comm, cfg.drift_check_c);
            ok &= check.pass;
            std::int64_t unexcused = 0;
            std::int64_t excused = 0;
            std::int64_t changes = 0;
            std::int64_t reads = 0;
            std::int64_t premise = 0;
            std::int64_t transients = 0;
            for (int i = 0; i < 20; ++i)
            {
                const auto ep = episode(cfg, AlgorithmKind::kDncb, cfg.base_seed + static_cast<std::uint64_t>(i), true);
                const auto rep = view_equivalence(ep.trace, cfg.dims.arms, cfg.dims.agents);
                unexcused += rep.unexcused();
                excused += static_cast<std::int64_t>(rep.episodes.size()) - rep.unexcused();
                changes += rep.view_changes;
                reads += ep.board_reads;
                premise += rep.premise_failures;
                transients += rep.mask_transients;
            }
            ok &= unexcused == 0 && reads == 0 && changes > 0;
            detail += std::string(detail.empty() ? "" : "; ") + "N=" + std::to_string(cfg.dims.agents) +
                      ": changes " + std::to_string(changes) + ", unexcused " + std::to_string(unexcused) +
                      ", excused " + std::to_string(excused) + " (premise failures " + std::to_string(premise) +
                      "), whole-mask transients " + std::to_string(transients) + ", board reads " +
                      std::to_string(reads);
        }
        return Verdict{ok, detail};
    });

    criterion("optimality_test_soundness", 0.0, [] {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const Time horizon = 4000;
        int successes = 0;
        int instances_hit = 0;
        int unsound = 0;
        for (int inst = 0; inst < 1000; ++inst)
        {
            const int k = std::uniform_int_distribution<int>(2, 5)(rng);
            const double delta = std::pow(10.0, -3.0 - 3.0 * u(rng));
            // One clear leader keeps successes reachable at this horizon; the rest are close together.
            DriftModel model;
            model.kind = DriftKind::kRandomWalk;
            model.step = delta;
            model.init.assign(1, std::vector<double>(static_cast<std::size_t>(k)));
            for (auto& v : model.init[0])
                v = 0.3 * u(rng);
            model.init[0][static_cast<std::size_t>(std::uniform_int_distribution<int>(0, k - 1)(rng))] =
                0.6 + 0.4 * u(rng);
            const auto env = generate_trajectory(model, Dimensions{1, k, horizon}, rng(), 0.0);

            stats::PullHistory hist(k);
            stats::TestParams params;
            int checked = 0;
            for (Time t = 1; t <= horizon && checked < 20; ++t)
            {
                const Arm a = static_cast<Arm>((t - 1) % k);
                hist.record(a, t, env.mean(0, a, t));
                const auto out = stats::optimality_test(hist, ArmSet::all(k), t, horizon, delta, params);
                if (!out)
                    continue;
                ++successes;
                instances_hit += checked == 0;
                ++checked;
                // Recompute per-arm window averages straight from the means tensor.
                const auto w = static_cast<Time>(out->window);
                auto window_avg = [&](Arm b) {
                    double s = 0.0;
                    Time seen = 0;
                    for (Time tt = t; tt >= 1 && seen < w; --tt)
                        if ((tt - 1) % k == b)
                        {
                            s += env.mean(0, b, tt);
                            ++seen;
                        }
                    return seen == w ? s / static_cast<double>(w) : std::nan("");
                };
                const double margin = 4.0 * std::sqrt(2.0 * std::log(static_cast<double>(horizon)) /
                                                      static_cast<double>(w)) - delta;
                const double win = window_avg(out->winner);
                for (Arm b = 0; b < k; ++b)
                    if (b != out->winner && !(win > window_avg(b) + margin))
                        ++unsound;
            }
        }
        return Verdict{unsound == 0 && successes > 0,
                       "1e3 noise-free instances, " + std::to_string(instances_hit) + " with successes, " +
                           std::to_string(successes) + " successes checked, unsound " + std::to_string(unsound)};
    });

    criterion("dynamic_gap_oracle", 0.0, [] {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        int off = 0;
        double worst = 0.0;
        for (int inst = 0; inst < 100; ++inst)
        {
            const int k = std::uniform_int_distribution<int>(2, 4)(rng);
            const Time horizon = std::uniform_int_distribution<int>(50, 500)(rng);
            DriftModel model;
            model.kind = DriftKind::kRandomWalk;
            model.step = 0.01;
            model.init.assign(1, std::vector<double>(static_cast<std::size_t>(k)));
            for (auto& v : model.init[0])
                v = u(rng);
            const auto env = generate_trajectory(model, Dimensions{1, k, horizon}, rng(), 0.0);
            stats::GapCalculator::Params p;
            p.c0 = 0.5 + 4.0 * u(rng); // small c0 keeps windows inside t <= 500
            stats::GapCalculator calc(env, 0, p);
            const Time t = std::uniform_int_distribution<Time>(1, horizon)(rng);
            const ArmSet dominated = k > 2 && u(rng) < 0.5 ? ArmSet::single(0) : ArmSet{};

            // Exhaustive scan: every lambda = i / 1000, direct summation of the means.
            const double log_t = std::log(static_cast<double>(horizon));
            double oracle = -1.0;
            for (int i = 1000; i >= 1 && oracle < 0; --i)
            {
                const double lam = i / 1000.0;
                const auto w = static_cast<Time>(std::ceil(p.c0 * log_t / (lam * lam)));
                if (t - w + 1 < 1)
                    continue;
                double min_gap = 1e300;
                for (Arm a = 0; a < k; ++a)
                    for (Arm b = a + 1; b < k; ++b)
                    {
                        if (dominated.contains(a) || dominated.contains(b))
                            continue;
                        double s = 0.0;
                        for (Time tt = t - w + 1; tt <= t; ++tt)
                            s += env.mean(0, a, tt) - env.mean(0, b, tt);
                        min_gap = std::min(min_gap, std::abs(s) / static_cast<double>(w));
                    }
                if (min_gap >= lam)
                    oracle = lam;
            }
            if (oracle < 0)
                oracle = p.c1 * (k - dominated.size()) * log_t / static_cast<double>(t);
            const double got = calc.lambda(dominated, t);
            worst = std::max(worst, std::abs(got - oracle));
            off += std::abs(got - oracle) > 1e-3 + 1e-12;
        }
        char buf[96];
        std::snprintf(buf, sizeof buf, "100 instances k<=4 t<=500, off-by-more-than-a-step %d, max diff %.2g", off,
                      worst);
        return Verdict{off == 0, buf};
    });

    criterion("determinism", 0.0, [] {
        bool same = true;
        std::size_t bytes = 0;
        for (const char* name : {"hierarchy.json", "collision_n3.json"})
        {
            const auto cfg = config(name);
            std::string first;
            for (int rep = 0; rep < 2; ++rep)
            {
                const auto ep = episode(cfg, AlgorithmKind::kDncb, 42, cfg.output.views);
                std::ostringstream os;
                write_trace_csv(os, ep.trace, "42");
                if (rep == 0)
                    first = os.str();
                else
                    same &= os.str() == first;
            }
            bytes += first.size();
        }
        return Verdict{same, "two configs, repeated (config, seed) traces identical over " + std::to_string(bytes) +
                                 " bytes each run"};
    });

    std::printf("acceptance: %d failing\n", failures);
    return failures == 0 ? 0 : 1;
}
