#include "dncb/comm.hpp"

#include <algorithm>
#include <cstdio>

namespace dncb
{

Blackboard::Blackboard(int n_agents) : entries_(static_cast<std::size_t>(std::max(n_agents, 0))) {}

void Blackboard::write(const BoardEntry& entry, Time t)
{
    if (entry.rank < 1 || entry.rank > static_cast<Rank>(entries_.size()))
        throw ProtocolError("board write from unknown rank " + std::to_string(entry.rank));
    auto& slot = entries_[static_cast<std::size_t>(entry.rank - 1)];
    if (slot && slot->until > t)
        throw ProtocolError("round " + std::to_string(t) + ": rank " + std::to_string(entry.rank) +
                            " already holds a live board entry");
    slot = entry;
}

void Blackboard::retract(Rank rank)
{
    if (rank >= 1 && rank <= static_cast<Rank>(entries_.size()))
        entries_[static_cast<std::size_t>(rank - 1)].reset();
}

std::optional<BoardEntry> Blackboard::entry(Rank rank, Time t) const
{
    if (rank < 1 || rank > static_cast<Rank>(entries_.size()))
        return std::nullopt;
    const auto& slot = entries_[static_cast<std::size_t>(rank - 1)];
    if (slot && slot->until > t)
        return slot;
    return std::nullopt;
}

DominatedView Blackboard::view(Rank observer, Time t)
{
    ++agent_reads_;
    return diagnostic_view(observer, t);
}

DominatedView Blackboard::diagnostic_view(Rank observer, Time t) const
{
    DominatedView v;
    const auto upto = static_cast<std::size_t>(std::clamp<Rank>(observer - 1, 0, static_cast<Rank>(entries_.size())));
    for (std::size_t i = 0; i < upto; ++i)
    {
        const auto& slot = entries_[i];
        if (slot && slot->until > t)
        {
            v.arms.insert(slot->arm);
            v.min_expiry = std::min(v.min_expiry, slot->until);
        }
    }
    return v;
}

CollisionInference::CollisionInference(Rank observer, int n_agents)
    : observer_(observer), n_agents_(n_agents), q_(static_cast<std::size_t>(std::max(observer - 1, 0))),
      toggles_(q_.size(), 0)
{
}

void CollisionInference::observe(const Feedback& feedback)
{
    if (feedback.matched)
        return;
    Rank winner = 0;
    if (feedback.winner)
        winner = *feedback.winner;
    else if (n_agents_ == 2)
        winner = 1;
    else
        throw ProtocolError("round " + std::to_string(feedback.t) + ": collision without winner index for rank " +
                            std::to_string(observer_) + " (N >= 3 needs the winner-index reward model)");
    if (winner < 1 || winner >= observer_)
        throw ProtocolError("round " + std::to_string(feedback.t) + ": rank " + std::to_string(observer_) +
                            " blocked by rank " + std::to_string(winner));
    auto& slot = q_[static_cast<std::size_t>(winner - 1)];
    if (slot)
        slot.reset();
    else
        slot = feedback.arm;
    ++toggles_[static_cast<std::size_t>(winner - 1)];
}

DominatedView CollisionInference::view() const
{
    DominatedView v;
    for (const auto& slot : q_)
        if (slot)
            v.arms.insert(*slot);
    return v;
}

std::optional<Arm> CollisionInference::q(Rank rank) const
{
    if (rank < 1 || rank >= observer_)
        return std::nullopt;
    return q_[static_cast<std::size_t>(rank - 1)];
}

std::int64_t CollisionInference::toggles(Rank rank) const
{
    if (rank < 1 || rank >= observer_)
        return 0;
    return toggles_[static_cast<std::size_t>(rank - 1)];
}

DriftCheck effective_drift_check(double env_drift, double algorithm_delta, int n_arms, CommMode mode, double c)
{
    if (mode == CommMode::kBlackboard)
        return {};
    const double bound = c * algorithm_delta / static_cast<double>(n_arms);
    if (env_drift <= bound * (1.0 + 1e-12))
        return {};
    char buf[192];
    std::snprintf(buf, sizeof buf, "environment drift %.6g exceeds c*delta/k = %.6g (c=%.3g, delta=%.6g, k=%d)",
                  env_drift, bound, c, algorithm_delta, n_arms);
    return {false, buf};
}

} // namespace dncb
