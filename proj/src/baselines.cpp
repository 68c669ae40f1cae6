#include "dncb/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dncb
{

Arm ucb_select(ArmSet candidates, const std::vector<std::int64_t>& counts, const std::vector<double>& sums, Time t)
{
    const double log_t = std::log(static_cast<double>(std::max<Time>(t, 1)));
    Arm best = -1;
    double best_index = -std::numeric_limits<double>::infinity();
    for (const Arm a : candidates.to_vector())
    {
        const auto n = counts[static_cast<std::size_t>(a)];
        if (n == 0)
            return a;
        const double index =
            sums[static_cast<std::size_t>(a)] / static_cast<double>(n) + std::sqrt(2.0 * log_t / static_cast<double>(n));
        if (index > best_index)
        {
            best_index = index;
            best = a;
        }
    }
    return best;
}

UcbAgent::UcbAgent(int n_arms)
    : counts_(static_cast<std::size_t>(n_arms), 0), sums_(static_cast<std::size_t>(n_arms), 0.0)
{
    if (n_arms < 1 || n_arms > kMaxArms)
        throw ConfigError("environment.arms", "out of range");
}

Arm UcbAgent::choose_arm(Time t)
{
    return ucb_select(ArmSet::all(static_cast<int>(counts_.size())), counts_, sums_, t);
}

void UcbAgent::observe(const Feedback& feedback)
{
    const auto a = static_cast<std::size_t>(feedback.arm);
    ++counts_[a];
    sums_[a] += feedback.matched ? feedback.reward : 0.0;
}

UcbD3Agent::UcbD3Agent(UcbD3Params params)
    : params_(params), counts_(static_cast<std::size_t>(params.n_arms), 0),
      sums_(static_cast<std::size_t>(params.n_arms), 0.0), phase_matches_(static_cast<std::size_t>(params.n_arms), 0)
{
    if (params_.n_arms < 1 || params_.n_arms > kMaxArms)
        throw ConfigError("environment.arms", "out of range");
    if (params_.phase_base < 1)
        throw ConfigError("algorithm.phase_base", "must be >= 1");
}

void UcbD3Agent::begin_round(Time t, const DominatedView& view)
{
    if (!started_)
        throw ProtocolError("UcbD3Agent::begin_round before start()");
    if (phase_ > 0 && t < phase_end_)
        return;

    // Phase boundary: freeze the dominated set, then post last phase's most-matched free arm.
    dominated_ = view.arms;
    blocked_ = ArmSet{};
    const Time length = params_.phase_base << std::min<std::int64_t>(phase_, 40);
    phase_end_ = t + length;
    posted_.reset();
    if (phase_ > 0)
    {
        Arm best = -1;
        std::int64_t best_count = 0;
        for (Arm a = 0; a < params_.n_arms; ++a)
        {
            const auto c = phase_matches_[static_cast<std::size_t>(a)];
            if (!dominated_.contains(a) && c > best_count)
            {
                best = a;
                best_count = c;
            }
        }
        if (best >= 0)
            posted_ = Commitment{best, phase_end_};
    }
    std::fill(phase_matches_.begin(), phase_matches_.end(), 0);
    ++phase_;
}

Arm UcbD3Agent::choose_arm(Time t)
{
    const ArmSet free = ArmSet::all(params_.n_arms).minus(dominated_);
    const ArmSet open = free.minus(blocked_);
    return ucb_select(open.empty() ? free : open, counts_, sums_, t);
}

void UcbD3Agent::observe(const Feedback& feedback)
{
    const auto a = static_cast<std::size_t>(feedback.arm);
    if (!feedback.matched)
    {
        blocked_.insert(feedback.arm);
        return;
    }
    ++counts_[a];
    sums_[a] += feedback.reward;
    ++phase_matches_[a];
}

} // namespace dncb
