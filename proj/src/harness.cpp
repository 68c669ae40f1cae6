#include "dncb/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "dncb/baselines.hpp"
#include "dncb/dncb_agent.hpp"

namespace dncb
{

double lower_quantile(std::span<const double> values, double q)
{
    if (values.empty())
        throw std::invalid_argument("lower_quantile: no values");
    std::vector<double> v(values.begin(), values.end());
    const auto n = static_cast<double>(v.size());
    const auto k = static_cast<std::size_t>(std::max(1.0, std::ceil(q * n))) - 1;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
    return v[k];
}

std::vector<Time> sample_times(Time horizon, Time stride)
{
    std::vector<Time> out;
    for (Time t = stride; t <= horizon; t += stride)
        out.push_back(t);
    if (out.empty() || out.back() != horizon)
        out.push_back(horizon);
    return out;
}

std::vector<AggregateRow> aggregate(const RegretSamples& s)
{
    std::vector<AggregateRow> rows;
    if (s.samples.empty())
        return rows;
    std::vector<double> column(s.samples.size());
    for (std::size_t ti = 0; ti < s.times.size(); ++ti)
    {
        for (int j = 0; j < s.agents; ++j)
        {
            for (std::size_t run = 0; run < s.samples.size(); ++run)
                column[run] = s.samples[run][ti * static_cast<std::size_t>(s.agents) + static_cast<std::size_t>(j)];
            rows.push_back({s.times[ti], j + 1, lower_quantile(column, 0.5), lower_quantile(column, 0.25),
                            lower_quantile(column, 0.75)});
        }
    }
    return rows;
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows)
{
    out << "t,rank,median,q25,q75\n";
    char buf[160];
    for (const auto& r : rows)
    {
        const int len = std::snprintf(buf, sizeof buf, "%lld,%d,%.17g,%.17g,%.17g\n", static_cast<long long>(r.t),
                                      r.rank, r.median, r.q25, r.q75);
        out.write(buf, len);
    }
}

std::vector<double> ExperimentResult::median_final_regret() const
{
    std::vector<double> out;
    if (runs.empty())
        return out;
    const std::size_t n = runs.front().final_regret.size();
    std::vector<double> column(runs.size());
    for (std::size_t j = 0; j < n; ++j)
    {
        for (std::size_t i = 0; i < runs.size(); ++i)
            column[i] = runs[i].final_regret[j];
        out.push_back(lower_quantile(column, 0.5));
    }
    return out;
}

PolicyFactory make_policy_factory(const ExperimentConfig& config, AlgorithmKind kind)
{
    const int k = config.dims.arms;
    switch (kind)
    {
    case AlgorithmKind::kDncb:
    case AlgorithmKind::kSnoozeIt: {
        DncbParams p;
        p.n_arms = k;
        p.horizon = config.dims.horizon;
        p.delta = config.algorithm.delta;
        p.test = config.algorithm.test;
        p.max_subset_tests = config.algorithm.max_subset_tests;
        p.solo = kind == AlgorithmKind::kSnoozeIt;
        return [p](int) { return std::make_unique<DncbAgent>(p); };
    }
    case AlgorithmKind::kUcb:
        return [k](int) { return std::make_unique<UcbAgent>(k); };
    case AlgorithmKind::kUcbD3: {
        if (config.episode.comm != CommMode::kBlackboard)
            throw ConfigError("algorithm.name", "ucb_d3 needs comm.mode = blackboard");
        UcbD3Params p{k, config.algorithm.phase_base};
        return [p](int) { return std::make_unique<UcbD3Agent>(p); };
    }
    }
    throw ConfigError("algorithm.name", "unknown algorithm");
}

int worker_count()
{
    if (const char* env = std::getenv("DNCB_WORKERS"))
    {
        const int n = std::atoi(env);
        if (n >= 1)
            return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace
{

namespace fs = std::filesystem;

std::vector<std::string> drift_warnings(const ExperimentConfig& config)
{
    std::vector<std::string> out;
    const auto check = effective_drift_check(config.drift.step, config.algorithm.delta, config.dims.arms,
                                             config.episode.comm, config.drift_check_c);
    if (!check.pass)
        out.push_back(check.message);
    return out;
}

void write_outputs(const ExperimentResult& result, const std::string& dir)
{
    fs::create_directories(dir);
    {
        std::ofstream out(fs::path(dir) / "aggregate.csv", std::ios::binary);
        write_aggregate_csv(out, result.aggregate);
    }
    std::ofstream out(fs::path(dir) / "summary.json", std::ios::binary);
    write_summary_json(out, result);
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, AlgorithmKind kind, const RunOptions& options)
{
    ExperimentResult result;
    result.algorithm = kind;
    result.config_hash = config_hash(config);
    result.warnings = drift_warnings(config);
    result.runs.resize(static_cast<std::size_t>(config.runs));
    result.samples.agents = config.dims.agents;
    result.samples.times = sample_times(config.dims.horizon, config.output.aggregate_stride);
    result.samples.samples.resize(static_cast<std::size_t>(config.runs));

    const PolicyFactory factory = make_policy_factory(config, kind);
    const bool traces = config.output.traces && !options.out_dir.empty();
    const fs::path trace_dir = fs::path(options.out_dir) / "traces";
    if (traces)
        fs::create_directories(trace_dir);

    std::atomic<int> next{0};
    std::mutex failure_mutex;
    std::exception_ptr failure;
    std::uint64_t failed_seed = 0;

    auto worker = [&]() {
        for (int i = next++; i < config.runs; i = next++)
        {
            const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(i);
            try
            {
                const auto env = generate_trajectory(config.drift, config.dims, seed, config.noise_sigma);
                const EpisodeResult ep = run_episode(env, factory, config.episode, seed);
                auto& run = result.runs[static_cast<std::size_t>(i)];
                run.seed = seed;
                run.learned_rank = ep.learned_rank;
                run.final_regret = ep.final_regret;
                run.phase_count = ep.phase_count;
                run.forced_rounds = ep.forced_rounds;
                run.board_reads = ep.board_reads;
                auto& row = result.samples.samples[static_cast<std::size_t>(i)];
                for (const Time t : result.samples.times)
                    for (int j = 0; j < ep.trace.agents; ++j)
                        row.push_back(ep.trace.cum_regret[ep.trace.row(t, j)]);
                if (traces)
                {
                    std::ofstream out(trace_dir / ("run_" + std::to_string(seed) + ".csv"), std::ios::binary);
                    write_trace_csv(out, ep.trace, std::to_string(seed));
                }
            }
            catch (...)
            {
                std::lock_guard lock(failure_mutex);
                if (!failure || seed < failed_seed)
                {
                    failure = std::current_exception();
                    failed_seed = seed;
                }
            }
        }
    };

    const int workers = std::clamp(options.workers > 0 ? options.workers : worker_count(), 1, config.runs);
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w)
        pool.emplace_back(worker);
    worker();
    for (auto& th : pool)
        th.join();

    if (failure)
    {
        try
        {
            std::rethrow_exception(failure);
        }
        catch (const ConfigError&)
        {
            throw;
        }
        catch (const std::exception& e)
        {
            throw EpisodeFailure(failed_seed, e.what());
        }
    }

    result.aggregate = aggregate(result.samples);
    if (!options.out_dir.empty())
        write_outputs(result, options.out_dir);
    return result;
}

std::vector<ExperimentResult> compare_algorithms(const ExperimentConfig& config, const RunOptions& options)
{
    if (config.compare.size() < 2)
        throw ConfigError("compare", "needs at least two algorithms");
    std::vector<ExperimentResult> out;
    std::vector<std::string> used;
    for (const AlgorithmKind kind : config.compare)
    {
        RunOptions sub = options;
        if (!options.out_dir.empty())
        {
            std::string name = to_string(kind);
            int copies = static_cast<int>(std::count(used.begin(), used.end(), name));
            used.push_back(name);
            if (copies > 0)
                name += "_" + std::to_string(copies + 1);
            sub.out_dir = (fs::path(options.out_dir) / name).string();
        }
        out.push_back(run_experiment(config, kind, sub));
    }
    return out;
}

void write_summary_json(std::ostream& out, const ExperimentResult& result)
{
    using nlohmann::json;
    json j;
    j["config_hash"] = result.config_hash;
    j["algorithm"] = to_string(result.algorithm);
    j["median_final_regret"] = result.median_final_regret();
    std::vector<std::int64_t> forced_total;
    std::vector<std::int64_t> phase_total;
    json runs = json::array();
    for (const auto& r : result.runs)
    {
        forced_total.resize(r.forced_rounds.size(), 0);
        phase_total.resize(r.phase_count.size(), 0);
        for (std::size_t a = 0; a < r.forced_rounds.size(); ++a)
        {
            forced_total[a] += r.forced_rounds[a];
            phase_total[a] += r.phase_count[a];
        }
        runs.push_back({{"seed", r.seed},
                        {"learned_rank", r.learned_rank},
                        {"final_regret", r.final_regret},
                        {"phase_count", r.phase_count},
                        {"forced_rounds", r.forced_rounds},
                        {"board_reads", r.board_reads}});
    }
    j["forced_exploration_total"] = forced_total;
    j["phase_count_total"] = phase_total;
    j["effective_drift_warnings"] = result.warnings;
    j["runs"] = runs;
    out << j.dump(2) << '\n';
}

void write_gap_csv(std::ostream& out, const ExperimentConfig& config)
{
    const auto env = generate_trajectory(config.drift, config.dims, config.base_seed, config.noise_sigma);
    const int k = config.dims.arms;
    if (k > 16)
        throw ConfigError("environment.arms", "gap export enumerates dominated sets and supports k <= 16");
    stats::GapCalculator::Params params;
    params.c0 = config.algorithm.c0;
    params.c1 = config.algorithm.test.c1;
    params.grid_step = config.gap.grid_step;
    const auto times = sample_times(config.dims.horizon, config.gap.stride);

    out << "t,rank,dominated_mask,lambda\n";
    char buf[96];
    for (Rank r = 1; r <= config.dims.agents; ++r)
    {
        stats::GapCalculator gap(env, r - 1, params);
        std::vector<ArmSet> sets;
        for (std::uint32_t m = 0; m < (std::uint32_t{1} << k); ++m)
        {
            const ArmSet c(m);
            if (c.size() <= r - 1 && k - c.size() >= 2)
                sets.push_back(c);
        }
        for (const Time t : times)
            for (const ArmSet c : sets)
            {
                const int len = std::snprintf(buf, sizeof buf, "%lld,%d,%u,%.17g\n", static_cast<long long>(t), r,
                                              c.mask(), gap.lambda(c, t));
                out.write(buf, len);
            }
    }
}

} // namespace dncb
