#include "dncb/diagnostics.hpp"

#include <algorithm>
#include <iterator>
#include <stdexcept>
#include <string>

namespace dncb
{

std::vector<HierarchyViolation> hierarchy_violations(const Trace& trace, Time lag)
{
    std::vector<HierarchyViolation> out;
    const int n = trace.agents;
    // last_exploit[j]: latest round <= t at which rank j + 1 exploited.
    std::vector<Time> last_exploit(static_cast<std::size_t>(n), -1);
    for (Time t = 1; t <= trace.horizon; ++t)
    {
        for (int j = 0; j < n; ++j)
            if (trace.state[trace.row(t, j)] == StateTag::kExploit)
                last_exploit[static_cast<std::size_t>(j)] = t;
        for (int j = 1; j < n; ++j)
        {
            if (trace.state[trace.row(t, j)] != StateTag::kExploit)
                continue;
            for (int h = 0; h < j; ++h)
            {
                if (last_exploit[static_cast<std::size_t>(h)] < t - lag)
                {
                    out.push_back({t, j + 1, h + 1});
                    break;
                }
            }
        }
    }
    return out;
}

std::vector<double> exploit_regret(const Trace& trace)
{
    std::vector<double> out(static_cast<std::size_t>(trace.agents), 0.0);
    for (Time t = 1; t <= trace.horizon; ++t)
        for (int j = 0; j < trace.agents; ++j)
        {
            const std::size_t i = trace.row(t, j);
            if (trace.state[i] == StateTag::kExploit)
                out[static_cast<std::size_t>(j)] += trace.inst_regret[i];
        }
    return out;
}

std::vector<Time> conservation_failures(const Trace& trace)
{
    std::vector<Time> out;
    for (Time t = 1; t <= trace.horizon; ++t)
    {
        int matched = 0;
        int blocked = 0;
        std::uint32_t arms = 0;
        bool clash = false;
        for (int j = 0; j < trace.agents; ++j)
        {
            const std::size_t i = trace.row(t, j);
            if (trace.matched[i])
            {
                ++matched;
                const std::uint32_t bit = std::uint32_t{1} << trace.arm[i];
                clash |= (arms & bit) != 0;
                arms |= bit;
            }
            else
            {
                ++blocked;
            }
        }
        if (clash || matched + blocked != trace.agents)
            out.push_back(t);
    }
    return out;
}

std::int64_t EquivalenceReport::unexcused() const
{
    return std::count_if(episodes.begin(), episodes.end(), [](const DivergenceEpisode& e) { return !e.excused; });
}

namespace
{

struct Change
{
    Time t;
    int rank_index;
};

struct Premise
{
    Time t;
    int rank_index;
    std::string what;
};

// Exploited arm of agent j at round t, or -1 when not exploiting.
Arm held(const Trace& trace, Time t, int j)
{
    const std::size_t i = trace.row(t, j);
    return trace.state[i] == StateTag::kExploit ? trace.arm[i] : -1;
}

} // namespace

EquivalenceReport view_equivalence(const Trace& trace, Time lag, Time first_round)
{
    if (!trace.has_views)
        throw std::invalid_argument("view_equivalence: trace was recorded without views");
    EquivalenceReport report;
    const int n = trace.agents;
    first_round = std::max<Time>(first_round, 1);

    std::vector<Change> changes;
    for (int h = 0; h < n; ++h)
        for (Time t = first_round + 1; t <= trace.horizon; ++t)
            if (held(trace, t, h) != held(trace, t - 1, h))
                changes.push_back({t, h});
    report.view_changes = static_cast<std::int64_t>(changes.size());

    for (int j = 1; j < n; ++j)
    {
        const Rank observer = j + 1;
        // A collision at round s shapes the view from s + 1, so a change at t_e
        // must be seen by round t_e + lag - 1 to be reflected within the lag.
        std::vector<Premise> failed;
        std::vector<std::vector<Time>> change_times(static_cast<std::size_t>(j));
        for (const Change& c : changes)
        {
            if (c.rank_index >= j)
                continue;
            change_times[static_cast<std::size_t>(c.rank_index)].push_back(c.t);
            bool hit = false;
            for (Time t = c.t; t <= std::min(trace.horizon, c.t + lag - 1) && !hit; ++t)
            {
                const std::size_t i = trace.row(t, j);
                hit = !trace.matched[i] && trace.winner[i] == c.rank_index + 1;
            }
            if (!hit)
            {
                failed.push_back({c.t, c.rank_index, "changed at round " + std::to_string(c.t) +
                                                         " without a collision within the lag"});
                ++report.premise_failures;
            }
        }
        // Toggling assumes one collision per change: a collision is legitimate only
        // as the first one with that rank since a change within the last `lag` rounds.
        std::vector<Time> consumed(static_cast<std::size_t>(j), 0);
        for (Time t = first_round; t <= trace.horizon; ++t)
        {
            const std::size_t i = trace.row(t, j);
            if (trace.matched[i] || trace.winner[i] < 1 || trace.winner[i] > j)
                continue;
            const auto h = static_cast<std::size_t>(trace.winner[i] - 1);
            const auto& times = change_times[h];
            const auto it = std::upper_bound(times.begin(), times.end(), t);
            const Time last = it == times.begin() ? 0 : *std::prev(it);
            if (last > 0 && last > t - lag && last > consumed[h])
            {
                consumed[h] = t;
                continue;
            }
            failed.push_back({t, trace.winner[i] - 1, "collided at round " + std::to_string(t) +
                                                          " without an unseen recent change"});
            ++report.premise_failures;
        }
        std::sort(failed.begin(), failed.end(), [](const Premise& a, const Premise& b) { return a.t < b.t; });

        DivergenceEpisode open;
        bool in_episode = false;
        auto close = [&]() {
            // Only a failure just before the onset can explain the episode.
            const auto it = std::lower_bound(failed.begin(), failed.end(), open.start - lag - 1,
                                             [](const Premise& p, Time v) { return p.t < v; });
            if (it != failed.end() && it->t <= open.start)
            {
                open.excused = true;
                open.reason = "rank " + std::to_string(it->rank_index + 1) + " " + it->what;
            }
            report.episodes.push_back(open);
            in_episode = false;
        };
        for (Time t = first_round; t <= trace.horizon; ++t)
        {
            const std::uint32_t inferred = trace.inferred_view[trace.row(t, j)];
            // Per arm: the inferred bit must match the true bit at some round of the lag window.
            std::uint32_t seen_in = 0;
            std::uint32_t seen_out = 0;
            bool whole = false;
            for (Time s = std::max(first_round, t - lag); s <= t; ++s)
            {
                const std::uint32_t truth = trace.true_view[trace.row(s, j)];
                seen_in |= truth;
                seen_out |= ~truth;
                whole |= truth == inferred;
            }
            const bool ok = (inferred & ~seen_in) == 0 && (~inferred & ~seen_out) == 0;
            report.mask_transients += ok && !whole;
            if (!ok)
            {
                if (!in_episode)
                {
                    open = DivergenceEpisode{observer, t, t, false, {}};
                    in_episode = true;
                }
                open.end = t;
            }
            else if (in_episode)
            {
                close();
            }
        }
        if (in_episode)
            close();
    }
    return report;
}

} // namespace dncb
