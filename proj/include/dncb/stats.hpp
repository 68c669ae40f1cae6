#ifndef DNCB_STATS_HPP
#define DNCB_STATS_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "dncb/env.hpp"
#include "dncb/types.hpp"

namespace dncb::stats
{

/// Per-arm append-only record of matched (reward-bearing) pulls.
class PullHistory
{
public:
    explicit PullHistory(int n_arms);

    /// Times must be strictly increasing within an arm.
    void record(Arm arm, Time t, double reward);

    int arms() const { return static_cast<int>(times_.size()); }
    std::size_t pulls(Arm arm) const { return times_[static_cast<std::size_t>(arm)].size(); }
    Time time_of(Arm arm, std::size_t i) const { return times_[static_cast<std::size_t>(arm)][i]; }
    double reward_of(Arm arm, std::size_t i) const;

    /// Mean of the last `w` rewards of `arm`, counting only pulls with index >= `first`.
    /// Empty when fewer than `w` such pulls exist (or w == 0).
    std::optional<double> windowed_mean(Arm arm, std::size_t w, std::size_t first = 0) const
    {
        const auto& p = prefix_[static_cast<std::size_t>(arm)];
        const std::size_t n = p.size() - 1;
        if (w == 0 || n < first || n - first < w)
            return std::nullopt;
        return static_cast<double>((p[n] - p[n - w]) / static_cast<long double>(w));
    }

private:
    std::vector<std::vector<Time>> times_;
    std::vector<std::vector<long double>> prefix_;
};

/// Confidence radius used in the optimality margin.
enum class RadiusRule
{
    kDefinition, ///< sqrt(2 log T / w), the test definition
    kGoodEvent,  ///< sqrt(8 log T / w), the concentration event of the analysis
};

template <typename Scalar = double>
Scalar confidence_radius(Scalar window, Time horizon, RadiusRule rule = RadiusRule::kDefinition)
{
    const Scalar c = rule == RadiusRule::kDefinition ? Scalar(2) : Scalar(8);
    return std::sqrt(c * std::log(static_cast<Scalar>(horizon)) / window);
}

/// Commit duration earned after `explore_duration` rounds of round-robin over
/// `active_arms` arms: (2 / delta) sqrt(a log T / Lambda). delta = 0 gives +inf.
template <typename Scalar = double>
Scalar buffer_length(Scalar explore_duration, int active_arms, Scalar delta, Time horizon)
{
    if (delta == Scalar(0))
        return std::numeric_limits<Scalar>::infinity();
    return (Scalar(2) / delta) *
           std::sqrt(static_cast<Scalar>(active_arms) * std::log(static_cast<Scalar>(horizon)) / explore_duration);
}

struct TestParams
{
    double c1 = 32.0;
    RadiusRule radius = RadiusRule::kDefinition;
    /// Ratio of the geometric per-arm window grid {1, b, b^2, ...}.
    int window_base = 2;
};

struct TestOutcome
{
    Arm winner = -1;
    double lambda_tilde = 0.0;
    std::size_t window = 0;
    Time at_time = 0;
};

/// Raised when the candidate set has fewer than two arms.
class DegenerateSetError : public std::invalid_argument
{
public:
    DegenerateSetError() : std::invalid_argument("optimality test needs at least two candidate arms") {}
};

/// Sliding-window optimality test over `candidates`.
///
/// Sweeps per-arm windows w on the geometric grid up to the fewest pulls any
/// candidate has since its `phase_start` index, smallest window first (largest
/// lambda-tilde). A window succeeds when the empirical leader a satisfies
///     mean_a(w) > mean_b(w) + 4 r(w) - delta   for every other candidate b.
/// `phase_start` may be empty (use all pulls) or hold one start index per arm.
std::optional<TestOutcome> optimality_test(const PullHistory& history, ArmSet candidates, Time t, Time horizon,
                                           double delta, const TestParams& params,
                                           std::span<const std::size_t> phase_start = {});

/// Dynamic-gap diagnostics for one agent over a fixed trajectory.
///
/// lambda_t^C[r] is the largest lambda on the grid {1, 1-g, ..., g} such that
/// every pair of arms outside C differs in average mean by at least lambda over
/// the trailing window w(lambda) = ceil(c0 log T / lambda^2); otherwise the
/// fallback c1 (k - |C|) log T / t. Never consulted by agents.
class GapCalculator
{
public:
    struct Params
    {
        double c0 = 8.0;
        double c1 = 32.0;
        double grid_step = 1e-3;
    };

    GapCalculator(const EnvironmentTrajectory& env, int agent, Params params);

    double lambda(ArmSet dominated, Time t) const;
    double fallback(ArmSet dominated, Time t) const;
    /// Window length w(lambda) used for grid point lambda.
    Time window(double lambda) const;

    /// min over |C| <= r - 2 (Delta_t[r]) and over |C| <= r - 1 (Delta-tilde_t[r]),
    /// restricted to C with at least two arms outside it.
    double delta(Rank r, Time t) const;
    double delta_tilde(Rank r, Time t) const;

    /// Block length min(c delta^{-2/3} k^{1/3} log^{1/3} T, T), at least 1.
    static Time block_length(double drift, int n_arms, Time horizon, double c = 1.0);

    /// Minimum of lambda_t^C over t in each block, sampled every `stride` rounds.
    std::vector<double> block_minima(ArmSet dominated, Time block, Time stride = 1) const;

    const Params& params() const { return params_; }

private:
    double min_over_sets(int max_size, Time t) const;

    const EnvironmentTrajectory* env_;
    int agent_;
    Params params_;
    int grid_points_;
    // Column t holds sum_{s <= t} mu(arm, s) for every arm; column 0 is zero.
    Eigen::MatrixXd prefix_;
};

/// Convenience wrapper building a GapCalculator for a single query.
double dynamic_gap(const EnvironmentTrajectory& env, Rank r, ArmSet dominated, Time t,
                   GapCalculator::Params params = {});

} // namespace dncb::stats

#endif // DNCB_STATS_HPP
