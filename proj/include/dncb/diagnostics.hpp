#ifndef DNCB_DIAGNOSTICS_HPP
#define DNCB_DIAGNOSTICS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dncb/sim.hpp"

namespace dncb
{

/// Rows (t, rank r) where r exploits although some higher rank has not
/// exploited at any round of [t - lag, t].
struct HierarchyViolation
{
    Time t = 0;
    Rank rank = 0;
    Rank idle_higher = 0;
};

std::vector<HierarchyViolation> hierarchy_violations(const Trace& trace, Time lag = 0);

/// Pseudo-regret summed over exploit rows, per agent.
std::vector<double> exploit_regret(const Trace& trace);

/// Rounds where matched + blocked != N or two matched agents share an arm.
std::vector<Time> conservation_failures(const Trace& trace);

/// Interval of rounds where an agent's inferred view matched no true view of the preceding `lag` rounds.
struct DivergenceEpisode
{
    Rank observer = 0;
    Time start = 0;
    Time end = 0;
    /// A higher-rank premise failure falls in [start - lag - 1, start].
    bool excused = false;
    std::string reason;
};

struct EquivalenceReport
{
    std::vector<DivergenceEpisode> episodes;
    std::int64_t view_changes = 0;
    std::int64_t premise_failures = 0;
    /// Rounds where every arm agrees within the lag but the whole mask matches no single round,
    /// as when two higher ranks change in the same round and are seen by separate collisions.
    std::int64_t mask_transients = 0;

    std::int64_t unexcused() const;
};

/// Lag-k board/inference equivalence on a trace recorded with views.
///
/// Agreement is per arm: each bit of the inferred view must equal the true bit
/// at some round of [t - lag, t]. A higher-rank change is an entry or exit of
/// Exploit, or a switch of the exploited arm. The premise fails when a change
/// draws no collision with the observer within `lag` rounds, or when a
/// collision is not the first with that rank since its last change within
/// `lag` rounds.
/// Divergence episodes that begin within lag + 1 rounds after a premise
/// failure are excused and reported.
EquivalenceReport view_equivalence(const Trace& trace, Time lag, Time first_round);

} // namespace dncb

#endif // DNCB_DIAGNOSTICS_HPP
