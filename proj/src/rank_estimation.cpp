#include "dncb/rank_estimation.hpp"

#include <stdexcept>

#include "dncb/policy.hpp"

namespace dncb
{

const char* to_string(StateTag tag)
{
    switch (tag)
    {
    case StateTag::kRankEstimation:
        return "rank_est";
    case StateTag::kExplore:
        return "explore";
    case StateTag::kExploit:
        return "exploit";
    case StateTag::kIndex:
        return "index";
    }
    return "?";
}

Arm RankEstimator::step(Time t) const
{
    if (t < 1 || t > rounds(n_agents_))
        throw std::out_of_range("RankEstimator::step: t outside [1, N-1]");
    if (t == 1)
        return 0;
    return first_match_ ? matched_arm_ : static_cast<Arm>(t - 1);
}

void RankEstimator::observe(Time t, Arm arm, bool matched)
{
    if (matched && !first_match_)
    {
        first_match_ = t;
        matched_arm_ = arm;
    }
}

} // namespace dncb
