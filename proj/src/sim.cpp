#include "dncb/sim.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>

#include "dncb/rank_estimation.hpp"

namespace dncb
{

int RoundOutcome::blocked() const
{
    return static_cast<int>(std::count(matched.begin(), matched.end(), false));
}

void resolve_round_into(const std::vector<Arm>& proposals, Time t, const EnvironmentTrajectory& env,
                        RewardStreams& streams, RoundOutcome& out)
{
    const std::size_t n = proposals.size();
    out.proposals = proposals;
    out.matched.assign(n, false);
    out.winner.assign(n, 0);
    out.rewards.assign(n, 0.0);

    // Agents are in rank order, so the first proposer of an arm wins it.
    std::uint32_t taken = 0;
    Rank owner[kMaxArms] = {};
    for (std::size_t j = 0; j < n; ++j)
    {
        const Arm a = proposals[j];
        if (a < 0 || a >= env.arms())
            throw ProtocolError("round " + std::to_string(t) + ": rank " + std::to_string(j + 1) +
                                " proposed invalid arm " + std::to_string(a));
        const std::uint32_t bit = std::uint32_t{1} << a;
        if (taken & bit)
        {
            out.winner[j] = owner[a];
            continue;
        }
        taken |= bit;
        owner[a] = static_cast<Rank>(j + 1);
        out.matched[j] = true;
        out.winner[j] = static_cast<Rank>(j + 1);
        out.rewards[j] = sample_reward(env, static_cast<int>(j), a, t, streams.at(static_cast<int>(j), a));
    }
}

RoundOutcome resolve_round(const std::vector<Arm>& proposals, Time t, const EnvironmentTrajectory& env,
                           RewardStreams& streams)
{
    if (static_cast<int>(proposals.size()) != env.agents())
        throw std::invalid_argument("resolve_round: need one proposal per agent");
    RoundOutcome out;
    resolve_round_into(proposals, t, env, streams, out);
    return out;
}

const std::vector<double>& RegretLedger::record(const RoundOutcome& outcome, const EnvironmentTrajectory& env, Time t)
{
    const std::size_t n = cumulative_.size();
    match_.resize(n);
    last_.resize(n);
    stable_match_into(env, t, match_);
    for (std::size_t j = 0; j < n; ++j)
    {
        const auto col = env.means_at(static_cast<int>(j), t);
        const double best = col(match_[j]);
        const double got = outcome.matched[j] ? col(outcome.proposals[j]) : 0.0;
        last_[j] = best - got;
        if (counting_)
            cumulative_[j] += last_[j];
    }
    return last_;
}

namespace
{

std::string context(Time t, int agent, const Trace& trace)
{
    std::string s = "round " + std::to_string(t) + ", agent rank " + std::to_string(agent + 1);
    if (t > 1 && !trace.state.empty())
        s += ", previous state " + std::string(to_string(trace.state[trace.row(t - 1, agent)]));
    return s;
}

} // namespace

EpisodeResult run_episode(const EnvironmentTrajectory& env, const PolicyFactory& factory,
                          const EpisodeOptions& options, std::uint64_t seed)
{
    const int n = env.agents();
    const Time horizon = env.horizon();
    if (options.comm == CommMode::kCollision && n >= 3 && !options.winner_index)
        throw ConfigError("comm.winner_index", "collision mode with N >= 3 needs the winner-index reward model");

    RewardStreams streams(derive_seed(seed, 3, 0, 0), n, env.arms());
    RegretLedger ledger(n);

    EpisodeResult result;
    Trace& tr = result.trace;
    tr.agents = n;
    tr.horizon = horizon;
    tr.has_views = options.record_views;
    const auto rows = static_cast<std::size_t>(horizon) * static_cast<std::size_t>(n);
    tr.state.resize(rows);
    tr.dominated.resize(rows);
    tr.arm.resize(rows);
    tr.matched.resize(rows);
    tr.winner.resize(rows);
    tr.reward.resize(rows);
    tr.inst_regret.resize(rows);
    tr.cum_regret.resize(rows);
    tr.forced.resize(rows);
    if (options.record_views)
    {
        tr.inferred_view.resize(rows);
        tr.true_view.resize(rows);
    }

    std::vector<std::unique_ptr<Policy>> policies;
    std::vector<RankEstimator> estimators;
    policies.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j)
    {
        policies.push_back(factory(j));
        estimators.emplace_back(n);
    }

    std::vector<Arm> proposals(static_cast<std::size_t>(n));
    RoundOutcome outcome;

    auto log_round = [&](Time t, const std::vector<StateTag>& states, const std::vector<std::uint32_t>& dom,
                         const std::vector<std::uint8_t>& forced) {
        const auto& inc = ledger.record(outcome, env, t);
        for (int j = 0; j < n; ++j)
        {
            const std::size_t i = tr.row(t, j);
            const auto ju = static_cast<std::size_t>(j);
            tr.state[i] = states[ju];
            tr.dominated[i] = dom[ju];
            tr.arm[i] = outcome.proposals[ju];
            tr.matched[i] = outcome.matched[ju] ? 1 : 0;
            tr.winner[i] = outcome.winner[ju];
            tr.reward[i] = outcome.rewards[ju];
            tr.inst_regret[i] = inc[ju];
            tr.cum_regret[i] = ledger.cumulative(j);
            tr.forced[i] = forced[ju];
        }
    };

    std::vector<StateTag> states(static_cast<std::size_t>(n), StateTag::kRankEstimation);
    std::vector<std::uint32_t> dom(static_cast<std::size_t>(n), 0);
    std::vector<std::uint8_t> forced(static_cast<std::size_t>(n), 0);

    // Rank estimation on rounds 1..N-1.
    const Time est_rounds = std::min<Time>(RankEstimator::rounds(n), horizon);
    ledger.set_counting(options.regret_during_rank_estimation);
    for (Time t = 1; t <= est_rounds; ++t)
    {
        for (int j = 0; j < n; ++j)
            proposals[static_cast<std::size_t>(j)] = estimators[static_cast<std::size_t>(j)].step(t);
        resolve_round_into(proposals, t, env, streams, outcome);
        for (int j = 0; j < n; ++j)
            estimators[static_cast<std::size_t>(j)].observe(t, proposals[static_cast<std::size_t>(j)],
                                                            outcome.matched[static_cast<std::size_t>(j)]);
        log_round(t, states, dom, forced);
    }
    ledger.set_counting(true);

    // Learned ranks, and the processing order they induce.
    result.learned_rank.resize(static_cast<std::size_t>(n));
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j)
    {
        const Rank r = estimators[static_cast<std::size_t>(j)].rank();
        result.learned_rank[static_cast<std::size_t>(j)] = r;
        order[static_cast<std::size_t>(j)] = j;
        try
        {
            policies[static_cast<std::size_t>(j)]->start(r);
        }
        catch (const ProtocolError& e)
        {
            throw ProtocolError(context(est_rounds + 1, j, tr) + ": " + e.what());
        }
    }
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return result.learned_rank[static_cast<std::size_t>(a)] < result.learned_rank[static_cast<std::size_t>(b)];
    });

    Blackboard board(n);
    std::vector<CollisionInference> inference;
    if (options.comm == CommMode::kCollision)
        for (int j = 0; j < n; ++j)
            inference.emplace_back(result.learned_rank[static_cast<std::size_t>(j)], n);

    for (Time t = est_rounds + 1; t <= horizon; ++t)
    {
        for (const int j : order)
        {
            const auto ju = static_cast<std::size_t>(j);
            const Rank r = result.learned_rank[ju];
            Policy& p = *policies[ju];
            const DominatedView truth = board.diagnostic_view(r, t);
            const DominatedView view =
                options.comm == CommMode::kBlackboard ? board.view(r, t) : inference[ju].view();
            try
            {
                p.begin_round(t, view);
            }
            catch (const ProtocolError& e)
            {
                throw ProtocolError(context(t, j, tr) + ": " + e.what());
            }
            const auto claim = p.commitment();
            const auto live = board.entry(r, t);
            const bool same = claim && live && live->arm == claim->arm && live->until == claim->until;
            if (!same)
            {
                board.retract(r);
                if (claim && claim->until > t)
                    board.write(BoardEntry{claim->arm, claim->until, r}, t);
            }
            states[ju] = p.state();
            dom[ju] = p.dominated().mask();
            forced[ju] = p.forced_exploration() ? 1 : 0;
            if (options.record_views)
            {
                const std::size_t i = tr.row(t, j);
                tr.inferred_view[i] = view.arms.mask();
                tr.true_view[i] = truth.arms.mask();
            }
        }
        for (int j = 0; j < n; ++j)
            proposals[static_cast<std::size_t>(j)] = policies[static_cast<std::size_t>(j)]->choose_arm(t);
        resolve_round_into(proposals, t, env, streams, outcome);
        for (int j = 0; j < n; ++j)
        {
            const auto ju = static_cast<std::size_t>(j);
            Feedback fb{t, proposals[ju], static_cast<bool>(outcome.matched[ju]), outcome.rewards[ju], std::nullopt};
            if (!fb.matched && options.winner_index)
                fb.winner = result.learned_rank[static_cast<std::size_t>(outcome.winner[ju] - 1)];
            try
            {
                policies[ju]->observe(fb);
                if (!inference.empty())
                    inference[ju].observe(fb);
                policies[ju]->end_round(t);
            }
            catch (const ProtocolError& e)
            {
                throw ProtocolError(context(t, j, tr) + ": " + e.what());
            }
        }
        log_round(t, states, dom, forced);
    }

    result.final_regret.resize(static_cast<std::size_t>(n));
    result.phase_count.resize(static_cast<std::size_t>(n));
    result.forced_rounds.resize(static_cast<std::size_t>(n), 0);
    for (int j = 0; j < n; ++j)
    {
        const auto ju = static_cast<std::size_t>(j);
        result.final_regret[ju] = ledger.cumulative(j);
        result.phase_count[ju] = policies[ju]->phase_count();
        for (Time t = 1; t <= horizon; ++t)
            result.forced_rounds[ju] += tr.forced[tr.row(t, j)];
    }
    result.board_reads = board.agent_reads();
    return result;
}

void write_trace_csv(std::ostream& out, const Trace& trace, const std::string& run_id, bool header)
{
    if (header)
    {
        out << "run_id,t,rank,state,dominated_mask,arm,matched,winner_rank,reward,inst_regret,cum_regret,forced_explore";
        if (trace.has_views)
            out << ",inferred_mask,true_mask";
        out << '\n';
    }
    char buf[256];
    for (Time t = 1; t <= trace.horizon; ++t)
    {
        for (int j = 0; j < trace.agents; ++j)
        {
            const std::size_t i = trace.row(t, j);
            int len = std::snprintf(buf, sizeof buf, ",%lld,%d,%s,%u,%d,%d,%d,%.17g,%.17g,%.17g,%d",
                                    static_cast<long long>(t), j + 1, to_string(trace.state[i]), trace.dominated[i],
                                    trace.arm[i], static_cast<int>(trace.matched[i]), trace.winner[i],
                                    trace.reward[i], trace.inst_regret[i], trace.cum_regret[i],
                                    static_cast<int>(trace.forced[i]));
            out << run_id;
            out.write(buf, len);
            if (trace.has_views)
            {
                len = std::snprintf(buf, sizeof buf, ",%u,%u", trace.inferred_view[i], trace.true_view[i]);
                out.write(buf, len);
            }
            out << '\n';
        }
    }
}

} // namespace dncb
