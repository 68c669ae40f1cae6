#ifndef DNCB_COMM_HPP
#define DNCB_COMM_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dncb/policy.hpp"

namespace dncb
{

enum class CommMode
{
    kBlackboard,
    kCollision,
};

/// One board tuple: `rank` holds `arm` on rounds t < `until`.
struct BoardEntry
{
    Arm arm = -1;
    Time until = 0;
    Rank rank = 0;

    bool operator==(const BoardEntry&) const = default;
};

/// Shared store of commitments, at most one live entry per rank.
///
/// Agent-facing reads go through view() and are counted so tests can assert
/// that nothing reads the board when the board regime is off.
class Blackboard
{
public:
    explicit Blackboard(int n_agents);

    /// Throws ProtocolError if `entry.rank` already holds a live entry at t.
    void write(const BoardEntry& entry, Time t);
    void retract(Rank rank);

    /// Live entry of `rank` at t, if any.
    std::optional<BoardEntry> entry(Rank rank, Time t) const;

    /// Dominated view C_t(r): arms of live entries from ranks < r.
    DominatedView view(Rank observer, Time t);
    /// Same as view() without touching the read audit.
    DominatedView diagnostic_view(Rank observer, Time t) const;

    std::int64_t agent_reads() const { return agent_reads_; }

private:
    std::vector<std::optional<BoardEntry>> entries_;
    std::int64_t agent_reads_ = 0;
};

/// Board-free reconstruction of higher ranks' states from collisions.
///
/// Q[s] toggles on every collision won by rank s: from Explore to Exploit it
/// records the contested arm as s's commitment, from Exploit back to Explore
/// it forgets it. No expiry information is available.
class CollisionInference
{
public:
    /// `n_agents` decides whether the winner may be implied (N = 2).
    CollisionInference(Rank observer, int n_agents);

    /// Update from this agent's own feedback. Needs feedback.winner unless N = 2.
    void observe(const Feedback& feedback);

    DominatedView view() const;
    /// Inferred committed arm of `rank`, empty while it is believed to explore.
    std::optional<Arm> q(Rank rank) const;
    std::int64_t toggles(Rank rank) const;

    Rank observer() const { return observer_; }

private:
    Rank observer_;
    int n_agents_;
    std::vector<std::optional<Arm>> q_;
    std::vector<std::int64_t> toggles_;
};

struct DriftCheck
{
    bool pass = true;
    std::string message;
};

/// Reduction condition for running without a board: env drift <= c * delta / k.
/// Always passes with the board on.
DriftCheck effective_drift_check(double env_drift, double algorithm_delta, int n_arms, CommMode mode,
                                 double c = 0.5);

} // namespace dncb

#endif // DNCB_COMM_HPP
