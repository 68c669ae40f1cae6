#include "dncb/stats.hpp"

#include <algorithm>
#include <string>

namespace dncb::stats
{

PullHistory::PullHistory(int n_arms)
    : times_(static_cast<std::size_t>(n_arms)), prefix_(static_cast<std::size_t>(n_arms), std::vector<long double>{0.0L})
{
}

void PullHistory::record(Arm arm, Time t, double reward)
{
    auto& times = times_[static_cast<std::size_t>(arm)];
    if (!times.empty() && times.back() >= t)
        throw std::invalid_argument("PullHistory::record: times must be strictly increasing per arm");
    times.push_back(t);
    auto& p = prefix_[static_cast<std::size_t>(arm)];
    p.push_back(p.back() + static_cast<long double>(reward));
}

double PullHistory::reward_of(Arm arm, std::size_t i) const
{
    const auto& p = prefix_[static_cast<std::size_t>(arm)];
    return static_cast<double>(p[i + 1] - p[i]);
}

std::optional<TestOutcome> optimality_test(const PullHistory& history, ArmSet candidates, Time t, Time horizon,
                                           double delta, const TestParams& params,
                                           std::span<const std::size_t> phase_start)
{
    if (candidates.size() < 2)
        throw DegenerateSetError();
    if (params.window_base < 2)
        throw std::invalid_argument("optimality_test: window_base must be >= 2");

    const auto start_of = [&](Arm a) -> std::size_t {
        return phase_start.empty() ? 0 : phase_start[static_cast<std::size_t>(a)];
    };

    std::size_t available = std::numeric_limits<std::size_t>::max();
    for (std::uint32_t m = candidates.mask(); m != 0; m &= m - 1)
    {
        const Arm a = std::countr_zero(m);
        const std::size_t n = history.pulls(a);
        const std::size_t s = start_of(a);
        available = std::min(available, n > s ? n - s : 0);
    }

    const double log_t = std::log(static_cast<double>(horizon));
    for (std::size_t w = 1; w <= available; w *= static_cast<std::size_t>(params.window_base))
    {
        const double margin = 4.0 * confidence_radius(static_cast<double>(w), horizon, params.radius) - delta;

        Arm leader = -1;
        double best = 0.0;
        double runner_up = -std::numeric_limits<double>::infinity();
        for (std::uint32_t m = candidates.mask(); m != 0; m &= m - 1)
        {
            const Arm a = std::countr_zero(m);
            const double mu = *history.windowed_mean(a, w, start_of(a));
            if (leader < 0 || mu > best)
            {
                if (leader >= 0)
                    runner_up = best;
                leader = a;
                best = mu;
            }
            else
            {
                runner_up = std::max(runner_up, mu);
            }
        }
        if (best > runner_up + margin)
        {
            return TestOutcome{leader, std::sqrt(params.c1 * log_t / static_cast<double>(w)), w, t};
        }
    }
    return std::nullopt;
}

GapCalculator::GapCalculator(const EnvironmentTrajectory& env, int agent, Params params)
    : env_(&env), agent_(agent), params_(params)
{
    if (!(params_.grid_step > 0.0 && params_.grid_step <= 1.0))
        throw ConfigError("diagnostics.grid_step", "must lie in (0, 1]");
    grid_points_ = static_cast<int>(std::lround(1.0 / params_.grid_step));
    const Eigen::MatrixXd& m = env.agent_means(agent);
    prefix_.resize(m.rows(), m.cols() + 1);
    prefix_.col(0).setZero();
    for (Eigen::Index t = 0; t < m.cols(); ++t)
        prefix_.col(t + 1) = prefix_.col(t) + m.col(t);
}

Time GapCalculator::window(double lambda) const
{
    const double w = params_.c0 * std::log(static_cast<double>(env_->horizon())) / (lambda * lambda);
    return static_cast<Time>(std::ceil(w));
}

double GapCalculator::fallback(ArmSet dominated, Time t) const
{
    return params_.c1 * static_cast<double>(env_->arms() - dominated.size()) *
           std::log(static_cast<double>(env_->horizon())) / static_cast<double>(t);
}

double GapCalculator::lambda(ArmSet dominated, Time t) const
{
    if (t < 1 || t > env_->horizon())
        throw std::out_of_range("GapCalculator::lambda: t outside [1, T]");
    const std::vector<Arm> free = ArmSet::all(env_->arms()).minus(dominated).to_vector();
    if (free.size() < 2)
        throw std::invalid_argument("GapCalculator::lambda: need at least two non-dominated arms");

    // Larger lambda needs a shorter window, so the feasible set starts where w(lambda) <= t.
    for (int i = 0; i < grid_points_; ++i)
    {
        const double lam = static_cast<double>(grid_points_ - i) * params_.grid_step;
        const Time w = window(lam);
        const Time s = t - w + 1;
        if (s < 1)
            continue;
        const Eigen::VectorXd sums = prefix_.col(t) - prefix_.col(s - 1);
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t i1 = 0; i1 < free.size(); ++i1)
            for (std::size_t i2 = i1 + 1; i2 < free.size(); ++i2)
                worst = std::min(worst, std::abs(sums(free[i1]) - sums(free[i2])));
        if (worst / static_cast<double>(w) >= lam)
            return lam;
    }
    return fallback(dominated, t);
}

double GapCalculator::min_over_sets(int max_size, Time t) const
{
    const int k = env_->arms();
    double best = std::numeric_limits<double>::infinity();
    const std::uint32_t limit = ArmSet::all(k).mask();
    for (std::uint32_t mask = 0;; ++mask)
    {
        const ArmSet c(mask);
        if (c.size() <= max_size && k - c.size() >= 2)
            best = std::min(best, lambda(c, t));
        if (mask == limit)
            break;
    }
    return best;
}

double GapCalculator::delta(Rank r, Time t) const
{
    return min_over_sets(std::max(0, r - 2), t);
}

double GapCalculator::delta_tilde(Rank r, Time t) const
{
    return min_over_sets(std::max(0, r - 1), t);
}

Time GapCalculator::block_length(double drift, int n_arms, Time horizon, double c)
{
    if (drift <= 0.0)
        return horizon;
    const double len = c * std::pow(drift, -2.0 / 3.0) * std::cbrt(static_cast<double>(n_arms)) *
                       std::cbrt(std::log(static_cast<double>(horizon)));
    return std::clamp<Time>(static_cast<Time>(std::floor(len)), 1, horizon);
}

std::vector<double> GapCalculator::block_minima(ArmSet dominated, Time block, Time stride) const
{
    if (block < 1 || stride < 1)
        throw std::invalid_argument("GapCalculator::block_minima: block and stride must be >= 1");
    std::vector<double> out;
    for (Time start = 1; start <= env_->horizon(); start += block)
    {
        const Time end = std::min(env_->horizon(), start + block - 1);
        double low = std::numeric_limits<double>::infinity();
        for (Time t = start; t <= end; t += stride)
            low = std::min(low, lambda(dominated, t));
        low = std::min(low, lambda(dominated, end));
        out.push_back(low);
    }
    return out;
}

double dynamic_gap(const EnvironmentTrajectory& env, Rank r, ArmSet dominated, Time t, GapCalculator::Params params)
{
    return GapCalculator(env, r - 1, params).lambda(dominated, t);
}

} // namespace dncb::stats
