#include "dncb/env.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace dncb
{
namespace
{

constexpr std::uint64_t kDomainInit = 1;
constexpr std::uint64_t kDomainWalk = 2;
constexpr std::uint64_t kDomainReward = 3;

// Slack for floating-point rounding when comparing consecutive means against the limit.
constexpr double kDriftSlack = 1e-12;

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double unit_uniform(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void validate_dims(const Dimensions& dims)
{
    if (dims.agents < 1)
        throw ConfigError("environment.agents", "must be >= 1");
    if (dims.arms > kMaxArms)
        throw ConfigError("environment.arms", "must be <= " + std::to_string(kMaxArms));
    if (dims.arms < dims.agents)
        throw ConfigError("environment.arms", "k must be >= N");
    if (dims.horizon < 1)
        throw ConfigError("environment.horizon", "must be >= 1");
}

Eigen::MatrixXd initial_means(const DriftModel& model, const Dimensions& dims, std::uint64_t seed)
{
    Eigen::MatrixXd init(dims.agents, dims.arms);
    if (!model.init.empty())
    {
        if (static_cast<int>(model.init.size()) != dims.agents)
            throw ConfigError("environment.drift.init", "expected one row per agent");
        for (int j = 0; j < dims.agents; ++j)
        {
            const auto& row = model.init[static_cast<std::size_t>(j)];
            if (static_cast<int>(row.size()) != dims.arms)
                throw ConfigError("environment.drift.init", "expected one mean per arm");
            for (int l = 0; l < dims.arms; ++l)
            {
                const double v = row[static_cast<std::size_t>(l)];
                if (!(v >= 0.0 && v <= 1.0))
                    throw ConfigError("environment.drift.init", "means must lie in [0, 1]");
                init(j, l) = v;
            }
        }
        return init;
    }
    for (int j = 0; j < dims.agents; ++j)
        for (int l = 0; l < dims.arms; ++l)
        {
            std::mt19937_64 rng(derive_seed(seed, kDomainInit, static_cast<std::uint64_t>(j),
                                            static_cast<std::uint64_t>(l)));
            init(j, l) = unit_uniform(rng);
        }
    return init;
}

void fill_random_walk(Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row, double start, double step, std::mt19937_64& rng)
{
    double x = start;
    row(0) = x;
    for (Eigen::Index t = 1; t < row.size(); ++t)
    {
        const double s = (rng() >> 63) ? step : -step;
        double next = x + s;
        if (next < 0.0 || next > 1.0)
            next = x - s;
        if (next < 0.0 || next > 1.0)
            next = x; // neither direction fits (step > 1/2 near the middle)
        x = next;
        row(t) = x;
    }
}

void fill_keyframes(Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row, double start, std::vector<Keyframe> frames,
                    double step, const std::string& field)
{
    const Time horizon = row.size();
    if (frames.empty() || frames.front().t > 1)
        frames.insert(frames.begin(), Keyframe{1, start});
    for (std::size_t i = 0; i < frames.size(); ++i)
    {
        if (frames[i].t < 1)
            throw ConfigError(field, "keyframe times must be >= 1");
        if (!(frames[i].value >= 0.0 && frames[i].value <= 1.0))
            throw ConfigError(field, "keyframe values must lie in [0, 1]");
        if (i > 0)
        {
            if (frames[i].t <= frames[i - 1].t)
                throw ConfigError(field, "keyframe times must be strictly increasing");
            const double slope = std::abs(frames[i].value - frames[i - 1].value) /
                                 static_cast<double>(frames[i].t - frames[i - 1].t);
            if (slope > step + kDriftSlack)
                throw ConfigError(field, "keyframe slope exceeds the drift step");
        }
    }
    std::size_t seg = 0;
    for (Time t = 1; t <= horizon; ++t)
    {
        while (seg + 1 < frames.size() && frames[seg + 1].t <= t)
            ++seg;
        double v = frames[seg].value;
        if (seg + 1 < frames.size())
        {
            const Keyframe& a = frames[seg];
            const Keyframe& b = frames[seg + 1];
            v = a.value + (b.value - a.value) * static_cast<double>(t - a.t) / static_cast<double>(b.t - a.t);
        }
        row(t - 1) = v;
    }
}

} // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t domain, std::uint64_t a, std::uint64_t b)
{
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ domain);
    h = splitmix64(h ^ (a + 0x632be59bd9b4e019ULL));
    return splitmix64(h ^ (b + 0x8cb92ba72f3d8dd7ULL));
}

EnvironmentTrajectory::EnvironmentTrajectory(int n_agents, int n_arms, Time horizon, double drift_limit,
                                             double noise_sigma, std::vector<Eigen::MatrixXd> means)
    : n_agents_(n_agents), n_arms_(n_arms), horizon_(horizon), drift_limit_(drift_limit),
      noise_sigma_(noise_sigma), means_(std::move(means))
{
    validate_dims(Dimensions{n_agents, n_arms, horizon});
    if (!(drift_limit >= 0.0))
        throw ConfigError("environment.drift.step", "must be >= 0");
    if (!(noise_sigma >= 0.0))
        throw ConfigError("environment.noise_sigma", "must be >= 0");
    if (static_cast<int>(means_.size()) != n_agents)
        throw ConfigError("environment", "means tensor must hold one matrix per agent");
    for (const auto& m : means_)
    {
        if (m.rows() != n_arms || m.cols() != horizon)
            throw ConfigError("environment", "means matrix must be arms x horizon");
        if ((m.array() < 0.0).any() || (m.array() > 1.0).any() || !m.allFinite())
            throw ConfigError("environment", "means must lie in [0, 1]");
    }
    if (max_step() > drift_limit + kDriftSlack)
        throw ConfigError("environment.drift.step", "trajectory drifts faster than the drift limit");
}

double EnvironmentTrajectory::mean(int agent, Arm arm, Time t) const
{
    if (agent < 0 || agent >= n_agents_ || arm < 0 || arm >= n_arms_ || t < 1 || t > horizon_)
        throw std::out_of_range("EnvironmentTrajectory::mean: index out of range");
    return means_[static_cast<std::size_t>(agent)](arm, t - 1);
}

double EnvironmentTrajectory::max_step() const
{
    double worst = 0.0;
    if (horizon_ < 2)
        return worst;
    for (const auto& m : means_)
    {
        const auto diff = (m.rightCols(horizon_ - 1) - m.leftCols(horizon_ - 1)).cwiseAbs();
        worst = std::max(worst, diff.maxCoeff());
    }
    return worst;
}

EnvironmentTrajectory generate_trajectory(const DriftModel& model, const Dimensions& dims, std::uint64_t seed,
                                          double noise_sigma)
{
    validate_dims(dims);
    if (!(model.step >= 0.0) || model.step > 1.0)
        throw ConfigError("environment.drift.step", "must lie in [0, 1]");

    const Eigen::MatrixXd init = initial_means(model, dims, seed);
    std::vector<Eigen::MatrixXd> means(static_cast<std::size_t>(dims.agents),
                                       Eigen::MatrixXd(dims.arms, dims.horizon));

    if (model.kind == DriftKind::kCustom && !model.keyframes.empty() &&
        static_cast<int>(model.keyframes.size()) != dims.agents)
        throw ConfigError("environment.drift.keyframes", "expected one entry per agent");

    for (int j = 0; j < dims.agents; ++j)
    {
        auto& m = means[static_cast<std::size_t>(j)];
        for (int l = 0; l < dims.arms; ++l)
        {
            switch (model.kind)
            {
            case DriftKind::kConstant:
                m.row(l).setConstant(init(j, l));
                break;
            case DriftKind::kRandomWalk: {
                std::mt19937_64 rng(derive_seed(seed, kDomainWalk, static_cast<std::uint64_t>(j),
                                                static_cast<std::uint64_t>(l)));
                fill_random_walk(m.row(l), init(j, l), model.step, rng);
                break;
            }
            case DriftKind::kCustom: {
                std::vector<Keyframe> frames;
                if (!model.keyframes.empty())
                {
                    const auto& per_agent = model.keyframes[static_cast<std::size_t>(j)];
                    if (static_cast<int>(per_agent.size()) != dims.arms)
                        throw ConfigError("environment.drift.keyframes", "expected one list per arm");
                    frames = per_agent[static_cast<std::size_t>(l)];
                }
                fill_keyframes(m.row(l), init(j, l), std::move(frames), model.step,
                               "environment.drift.keyframes[" + std::to_string(j) + "][" + std::to_string(l) + "]");
                break;
            }
            }
        }
    }
    return EnvironmentTrajectory(dims.agents, dims.arms, dims.horizon, model.step, noise_sigma, std::move(means));
}

void stable_match_into(const EnvironmentTrajectory& env, Time t, std::vector<Arm>& out)
{
    const int k = env.arms();
    out.resize(static_cast<std::size_t>(env.agents()));
    ArmSet taken;
    for (int j = 0; j < env.agents(); ++j)
    {
        const auto col = env.means_at(j, t);
        Arm best = -1;
        double best_mean = 0.0;
        for (Arm a = 0; a < k; ++a)
        {
            if (taken.contains(a))
                continue;
            if (best < 0 || col(a) > best_mean)
            {
                best = a;
                best_mean = col(a);
            }
        }
        out[static_cast<std::size_t>(j)] = best;
        taken.insert(best);
    }
}

std::vector<Arm> stable_match(const EnvironmentTrajectory& env, Time t)
{
    if (t < 1 || t > env.horizon())
        throw std::out_of_range("stable_match: t outside [1, T]");
    std::vector<Arm> out;
    stable_match_into(env, t, out);
    return out;
}

double sample_reward(const EnvironmentTrajectory& env, int agent, Arm arm, Time t, RewardRng& rng)
{
    const double mu = env.mean(agent, arm, t);
    if (env.noise_sigma() == 0.0)
        return mu;
    return mu + env.noise_sigma() * rng.standard_normal();
}

RewardStreams::RewardStreams(std::uint64_t seed, int n_agents, int n_arms) : n_arms_(n_arms)
{
    streams_.reserve(static_cast<std::size_t>(n_agents * n_arms));
    for (int j = 0; j < n_agents; ++j)
        for (int l = 0; l < n_arms; ++l)
            streams_.emplace_back(derive_seed(seed, kDomainReward, static_cast<std::uint64_t>(j),
                                              static_cast<std::uint64_t>(l)));
}

void write_trajectory_csv(std::ostream& out, const EnvironmentTrajectory& env)
{
    out << "agent,arm,t,mean\n";
    char buf[64];
    for (int j = 0; j < env.agents(); ++j)
        for (Arm l = 0; l < env.arms(); ++l)
            for (Time t = 1; t <= env.horizon(); ++t)
            {
                std::snprintf(buf, sizeof buf, "%.17g", env.agent_means(j)(l, t - 1));
                out << (j + 1) << ',' << l << ',' << t << ',' << buf << '\n';
            }
}

EnvironmentTrajectory read_trajectory_csv(std::istream& in, double noise_sigma, double drift_limit)
{
    struct Cell
    {
        int agent;
        int arm;
        Time t;
        double mean;
    };
    std::vector<Cell> cells;
    std::string line;
    std::size_t line_no = 0;
    int n_agents = 0, n_arms = 0;
    Time horizon = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        if (line_no == 1)
        {
            if (line.rfind("agent,arm,t,mean", 0) != 0)
                throw ConfigError("trajectory", "line 1: expected header agent,arm,t,mean");
            continue;
        }
        if (line.empty())
            continue;
        std::istringstream row(line);
        Cell c{};
        char c1 = 0, c2 = 0, c3 = 0;
        if (!(row >> c.agent >> c1 >> c.arm >> c2 >> c.t >> c3 >> c.mean) || c1 != ',' || c2 != ',' || c3 != ',')
            throw ConfigError("trajectory", "line " + std::to_string(line_no) + ": malformed row");
        if (c.agent < 1 || c.arm < 0 || c.t < 1)
            throw ConfigError("trajectory", "line " + std::to_string(line_no) + ": index out of range");
        n_agents = std::max(n_agents, c.agent);
        n_arms = std::max(n_arms, c.arm + 1);
        horizon = std::max(horizon, c.t);
        cells.push_back(c);
    }
    if (cells.empty())
        throw ConfigError("trajectory", "no rows");
    validate_dims(Dimensions{n_agents, n_arms, horizon});
    if (static_cast<std::size_t>(n_agents) * static_cast<std::size_t>(n_arms) * static_cast<std::size_t>(horizon) !=
        cells.size())
        throw ConfigError("trajectory", "tensor is incomplete or has duplicate cells");

    std::vector<Eigen::MatrixXd> means(static_cast<std::size_t>(n_agents),
                                       Eigen::MatrixXd::Constant(n_arms, horizon, -1.0));
    for (const Cell& c : cells)
    {
        double& slot = means[static_cast<std::size_t>(c.agent - 1)](c.arm, c.t - 1);
        if (slot >= 0.0)
            throw ConfigError("trajectory", "duplicate cell");
        slot = c.mean;
    }
    if (drift_limit < 0.0)
    {
        EnvironmentTrajectory probe(n_agents, n_arms, horizon, 1.0, noise_sigma, means);
        drift_limit = probe.max_step();
    }
    return EnvironmentTrajectory(n_agents, n_arms, horizon, drift_limit, noise_sigma, std::move(means));
}

} // namespace dncb
