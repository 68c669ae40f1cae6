#ifndef DNCB_RANK_ESTIMATION_HPP
#define DNCB_RANK_ESTIMATION_HPP

#include <optional>

#include "dncb/types.hpp"

namespace dncb
{

/// Collision routine that lets every agent learn its own rank in N - 1 rounds.
///
/// Round 1: everyone pulls arm 0. Rounds 2..N-1: an agent never matched pulls
/// arm t - 1; a matched agent keeps pulling its arm. The rank is the round of the
/// first match; an agent never matched by round N - 1 has rank N.
class RankEstimator
{
public:
    explicit RankEstimator(int n_agents) : n_agents_(n_agents) {}

    static Time rounds(int n_agents) { return n_agents - 1; }

    /// Arm to pull at round t in [1, N - 1].
    Arm step(Time t) const;
    void observe(Time t, Arm arm, bool matched);

    bool done(Time t) const { return t >= rounds(n_agents_); }
    /// Learned rank; valid once N - 1 rounds were observed.
    Rank rank() const { return first_match_ ? static_cast<Rank>(*first_match_) : n_agents_; }

private:
    int n_agents_;
    std::optional<Time> first_match_;
    Arm matched_arm_ = -1;
};

} // namespace dncb

#endif // DNCB_RANK_ESTIMATION_HPP
