#ifndef DNCB_ENV_HPP
#define DNCB_ENV_HPP

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "dncb/types.hpp"

namespace dncb
{

/// Mean tensor mu(agent, arm, t) plus the reward noise model.
///
/// Stored as one arms-by-horizon matrix per agent; column t-1 holds the means
/// at round t so that every per-round query touches one contiguous column.
/// Immutable after construction and safe to share between episode runners.
class EnvironmentTrajectory
{
public:
    EnvironmentTrajectory(int n_agents, int n_arms, Time horizon, double drift_limit,
                          double noise_sigma, std::vector<Eigen::MatrixXd> means);

    int agents() const { return n_agents_; }
    int arms() const { return n_arms_; }
    Time horizon() const { return horizon_; }
    double drift_limit() const { return drift_limit_; }
    double noise_sigma() const { return noise_sigma_; }

    /// Bounds-checked mean of `arm` for the agent ranked `agent + 1` at round t.
    double mean(int agent, Arm arm, Time t) const;

    /// Unchecked column view of all arm means for one agent at round t.
    auto means_at(int agent, Time t) const { return means_[static_cast<std::size_t>(agent)].col(t - 1); }

    const Eigen::MatrixXd& agent_means(int agent) const { return means_[static_cast<std::size_t>(agent)]; }

    /// Largest |mu(j, l, t+1) - mu(j, l, t)| over the whole tensor.
    double max_step() const;

private:
    int n_agents_;
    int n_arms_;
    Time horizon_;
    double drift_limit_;
    double noise_sigma_;
    std::vector<Eigen::MatrixXd> means_;
};

enum class DriftKind
{
    kConstant,
    kRandomWalk,
    kCustom,
};

/// One (time, value) anchor of a piecewise-linear custom trajectory.
struct Keyframe
{
    Time t = 1;
    double value = 0.0;
};

struct DriftModel
{
    DriftKind kind = DriftKind::kRandomWalk;
    /// Per-step drift magnitude; the trajectory's drift limit.
    double step = 0.0;
    /// Explicit initial means indexed [agent][arm]; empty means Uniform[0,1].
    std::vector<std::vector<double>> init;
    /// Custom kind only: keyframes indexed [agent][arm], linearly interpolated,
    /// held constant after the last one. Missing t = 1 anchors start from `init`.
    std::vector<std::vector<std::vector<Keyframe>>> keyframes;
};

struct Dimensions
{
    int agents = 1;
    int arms = 2;
    Time horizon = 1;
};

/// Build a trajectory; identical (model, dims, seed) give bit-identical means.
/// Throws ConfigError on k < N, T < 1, step outside [0, 1], or custom
/// keyframes whose slope exceeds `step`.
EnvironmentTrajectory generate_trajectory(const DriftModel& model, const Dimensions& dims,
                                          std::uint64_t seed, double noise_sigma);

/// Greedy serial-dictatorship assignment at round t: entry j is the arm of rank j + 1.
/// Ties go to the lowest arm index. Throws std::out_of_range on t outside [1, T].
std::vector<Arm> stable_match(const EnvironmentTrajectory& env, Time t);

/// Same as stable_match without bounds checks, writing into `out` (size N).
void stable_match_into(const EnvironmentTrajectory& env, Time t, std::vector<Arm>& out);

/// Independent Gaussian noise stream for one (agent, arm) pair.
class RewardRng
{
public:
    explicit RewardRng(std::uint64_t seed) : engine_(seed) {}
    double standard_normal() { return normal_(engine_); }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// mu(agent, arm, t) plus N(0, sigma^2) noise drawn from `rng`. sigma = 0 returns the mean exactly.
double sample_reward(const EnvironmentTrajectory& env, int agent, Arm arm, Time t, RewardRng& rng);

/// One RewardRng per (agent, arm), each keyed only by (seed, agent, arm).
class RewardStreams
{
public:
    RewardStreams(std::uint64_t seed, int n_agents, int n_arms);
    RewardRng& at(int agent, Arm arm) { return streams_[static_cast<std::size_t>(agent * n_arms_ + arm)]; }

private:
    int n_arms_;
    std::vector<RewardRng> streams_;
};

/// Seed for a named sub-stream of `master`; adding streams never perturbs existing ones.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t domain, std::uint64_t a, std::uint64_t b);

/// Flat CSV: header `agent,arm,t,mean`, agent as 1-based rank, arm 0-based, t 1-based.
void write_trajectory_csv(std::ostream& out, const EnvironmentTrajectory& env);

/// Inverse of write_trajectory_csv. Every (agent, arm, t) cell must appear exactly once.
/// `drift_limit` < 0 infers the limit as the observed max step.
EnvironmentTrajectory read_trajectory_csv(std::istream& in, double noise_sigma, double drift_limit = -1.0);

} // namespace dncb

#endif // DNCB_ENV_HPP
