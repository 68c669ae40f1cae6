#ifndef DNCB_DNCB_AGENT_HPP
#define DNCB_DNCB_AGENT_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "dncb/policy.hpp"
#include "dncb/stats.hpp"

namespace dncb
{

/// Round-robin exploration of every arm outside `dominated`.
struct ExploreMinus
{
    ArmSet dominated;
};

/// Commitment to `arm` for rounds t < `until`, taken while `dominated` was blocked above.
struct Exploit
{
    Arm arm = -1;
    Time until = 0;
    ArmSet dominated;
};

using PhaseState = std::variant<ExploreMinus, Exploit>;

/// Same phase in the sense of z_t: same explore set, or exploiting the same arm.
bool same_phase(const PhaseState& a, const PhaseState& b);

/// Per-dominated-set store of (arm, expiry) pairs earned by successful tests.
/// An entry (x, s) under key Omega allows exploiting x on rounds t < s once
/// every arm of Omega is held by higher ranks.
class CommitCache
{
public:
    /// Adds (arm, expiry) under `omega`; a repeated arm keeps the later expiry.
    void insert(ArmSet omega, Arm arm, Time expiry);
    /// Drops every entry with expiry <= t.
    void purge(Time t);
    /// Live entry (expiry > t) with the latest expiry, lowest arm on ties.
    std::optional<Commitment> best(ArmSet omega, Time t) const;
    /// True if some key Omega with |Omega| = size and Omega containing `dominated` has a live entry.
    bool has_live_superset(ArmSet dominated, int size, Time t) const;

    bool empty() const { return entries_.empty(); }
    std::size_t keys() const { return entries_.size(); }
    const std::vector<Commitment>* find(ArmSet omega) const;

private:
    std::map<ArmSet, std::vector<Commitment>> entries_;
};

/// Expiry earned by a test success after `tau` rounds of exploration in a phase
/// that began at `phase_start`, capped by T + 1 and by the higher ranks' expiry.
/// Empty when the buffer does not exceed `tau`: the phase must restart.
std::optional<Time> commit_expiry(Time phase_start, Time tau, int active_arms, double delta, Time horizon,
                                  Time view_expiry);

struct DncbParams
{
    int n_arms = 2;
    Time horizon = 1;
    /// Drift limit the agent assumes.
    double delta = 0.0;
    stats::TestParams test;
    /// Cap on dominated-set completions tested per round; 0 tests them all.
    std::size_t max_subset_tests = 0;
    /// Ignore rank and comm: a single-agent sliding-window explore-then-commit learner.
    bool solo = false;
};

/// Decentralized explore/commit learner for one rank.
///
/// While exploring [k] \ C the agent round-robins with a rank-dependent offset,
/// so exploring agents that share C never collide. Every round of exploration it
/// tests each completion Omega of C to r - 1 arms and caches (winner, expiry)
/// under Omega when the earned buffer exceeds the exploration already spent;
/// otherwise the phase restarts. It exploits only once all r - 1 higher ranks
/// are committed and the cache holds a live entry for exactly that set, and
/// never past the earliest known expiry of a higher rank.
class DncbAgent final : public Policy
{
public:
    explicit DncbAgent(DncbParams params);

    void start(Rank learned_rank) override;
    void begin_round(Time t, const DominatedView& view) override { update_state(t, view); }
    Arm choose_arm(Time t) override { return pull(t); }
    void observe(const Feedback& feedback) override;
    void end_round(Time t) override { test_and_commit(t); }

    std::optional<Commitment> commitment() const override;
    StateTag state() const override;
    ArmSet dominated() const override;
    bool forced_exploration() const override { return forced_; }
    std::int64_t phase_count() const override { return phase_index_; }

    /// Set z_t from the dominated view and the cache; starts a new phase when z changes.
    void update_state(Time t, const DominatedView& view);
    /// Arm for round t under the current state.
    Arm pull(Time t) const;
    /// Optimality tests for every tracked completion of the dominated set.
    void test_and_commit(Time t);

    Rank rank() const { return rank_; }
    const PhaseState& phase() const { return phase_; }
    Time phase_start() const { return phase_start_; }
    const CommitCache& cache() const { return cache_; }
    const stats::PullHistory& history() const { return history_; }
    /// Dominated-set completions Omega tested while exploring the current set.
    const std::vector<ArmSet>& test_sets() const { return test_sets_; }
    std::int64_t forced_rounds() const { return forced_rounds_; }
    std::int64_t failed_commits() const { return failed_commits_; }

private:
    void start_phase(Time t);
    void rebuild_test_sets(ArmSet dominated);

    DncbParams params_;
    Rank rank_ = 1;
    bool started_ = false;
    PhaseState phase_{ExploreMinus{}};
    std::int64_t phase_index_ = 0;
    Time phase_start_ = 0;
    Time view_expiry_ = kNoExpiry;
    bool forced_ = false;
    std::int64_t forced_rounds_ = 0;
    std::int64_t failed_commits_ = 0;

    stats::PullHistory history_;
    std::vector<std::size_t> phase_base_;
    CommitCache cache_;
    ArmSet test_sets_for_;
    bool test_sets_valid_ = false;
    std::vector<ArmSet> test_sets_;
};

} // namespace dncb

#endif // DNCB_DNCB_AGENT_HPP
