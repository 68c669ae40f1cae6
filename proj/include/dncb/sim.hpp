#ifndef DNCB_SIM_HPP
#define DNCB_SIM_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dncb/comm.hpp"
#include "dncb/env.hpp"
#include "dncb/policy.hpp"

namespace dncb
{

/// Result of one round of proposals. Agent index j is the agent of true rank j + 1.
struct RoundOutcome
{
    std::vector<Arm> proposals;
    std::vector<bool> matched;
    /// Rank that won the arm agent j proposed (j + 1 itself when matched).
    std::vector<Rank> winner;
    /// Sampled reward; exactly 0 for blocked agents.
    std::vector<double> rewards;

    int blocked() const;
};

/// Serial-dictatorship resolution: every contested arm goes to its lowest-rank
/// proposer, who draws a reward; everyone else is blocked with reward 0.
RoundOutcome resolve_round(const std::vector<Arm>& proposals, Time t, const EnvironmentTrajectory& env,
                           RewardStreams& streams);

/// Same resolution into a reused outcome (sized on first use).
void resolve_round_into(const std::vector<Arm>& proposals, Time t, const EnvironmentTrajectory& env,
                        RewardStreams& streams, RoundOutcome& out);

/// Per-agent pseudo-regret against the round's stable match.
class RegretLedger
{
public:
    explicit RegretLedger(int n_agents) : cumulative_(static_cast<std::size_t>(n_agents), 0.0) {}

    /// mu(j, l*, t) - matched * mu(j, pulled, t), from true means. Returns the per-agent increments.
    const std::vector<double>& record(const RoundOutcome& outcome, const EnvironmentTrajectory& env, Time t);

    double cumulative(int agent) const { return cumulative_[static_cast<std::size_t>(agent)]; }
    const std::vector<double>& last() const { return last_; }
    /// While off, increments are still computed but not added to the totals.
    void set_counting(bool on) { counting_ = on; }

private:
    std::vector<double> cumulative_;
    std::vector<double> last_;
    std::vector<Arm> match_;
    bool counting_ = true;
};

/// Per-round, per-rank trace stored column-wise. Row index = (t - 1) * N + j.
struct Trace
{
    int agents = 0;
    Time horizon = 0;
    bool has_views = false;

    std::vector<StateTag> state;
    std::vector<std::uint32_t> dominated;
    std::vector<Arm> arm;
    std::vector<std::uint8_t> matched;
    std::vector<Rank> winner;
    std::vector<double> reward;
    std::vector<double> inst_regret;
    std::vector<double> cum_regret;
    std::vector<std::uint8_t> forced;
    /// Filled when views are recorded: inferred (what the agent used) and true board views.
    std::vector<std::uint32_t> inferred_view;
    std::vector<std::uint32_t> true_view;

    std::size_t row(Time t, int agent) const
    {
        return static_cast<std::size_t>(t - 1) * static_cast<std::size_t>(agents) + static_cast<std::size_t>(agent);
    }
    std::size_t rows() const { return state.size(); }
};

struct EpisodeOptions
{
    CommMode comm = CommMode::kBlackboard;
    /// Blocked agents learn the winner's rank.
    bool winner_index = false;
    /// Count rank-estimation rounds in the regret totals.
    bool regret_during_rank_estimation = true;
    /// Record inferred and true dominated views per row.
    bool record_views = false;
};

struct EpisodeResult
{
    Trace trace;
    std::vector<Rank> learned_rank;
    std::vector<double> final_regret;
    std::vector<std::int64_t> phase_count;
    std::vector<std::int64_t> forced_rounds;
    /// Agent-facing board reads; must stay 0 in collision mode.
    std::int64_t board_reads = 0;
};

/// Builds the policy for the agent of true rank `agent + 1`. Policies never learn that index.
using PolicyFactory = std::function<std::unique_ptr<Policy>(int agent)>;

/// Rank estimation on rounds 1..N-1, then the policies on rounds N..T.
///
/// At each round boundary the runner updates agents in learned-rank order and
/// syncs each one's commitment to the board before the next rank reads it.
/// Throws ConfigError for collision mode with N >= 3 and no winner index, and
/// rethrows ProtocolError with round context.
EpisodeResult run_episode(const EnvironmentTrajectory& env, const PolicyFactory& factory,
                          const EpisodeOptions& options, std::uint64_t seed);

/// Header and rows of the trace CSV. Arms are 0-based; masks are bit masks over arm indices.
void write_trace_csv(std::ostream& out, const Trace& trace, const std::string& run_id, bool header = true);

} // namespace dncb

#endif // DNCB_SIM_HPP
