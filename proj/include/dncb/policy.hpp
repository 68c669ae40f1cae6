#ifndef DNCB_POLICY_HPP
#define DNCB_POLICY_HPP

#include <cstdint>
#include <optional>

#include "dncb/types.hpp"

namespace dncb
{

/// What the comm layer tells an agent about higher ranks at the start of a round.
struct DominatedView
{
    /// Arms currently committed by ranks above the observer.
    ArmSet arms;
    /// Earliest known expiry among those commitments; kNoExpiry when unknown.
    Time min_expiry = kNoExpiry;

    bool operator==(const DominatedView&) const = default;
};

/// Private per-agent result of one round. Agents never see anyone else's feedback.
struct Feedback
{
    Time t = 0;
    Arm arm = -1;
    bool matched = false;
    double reward = 0.0;
    /// Rank that won the arm when this agent was blocked and the winner-index
    /// reward model is on; empty otherwise.
    std::optional<Rank> winner;
};

/// Arm held until `until` (exclusive): the holder plays it on rounds t < until.
struct Commitment
{
    Arm arm = -1;
    Time until = 0;

    bool operator==(const Commitment&) const = default;
};

enum class StateTag : std::uint8_t
{
    kRankEstimation,
    kExplore,
    kExploit,
    kIndex, ///< index policies (UCB family) with no explore/exploit split
};

const char* to_string(StateTag tag);

/// A decentralized learner driven by the episode runner.
///
/// Per round the runner calls, in order: begin_round (ranks in order, each
/// seeing the board writes of higher ranks), choose_arm, observe, end_round.
/// Policies see only their own feedback and the view handed to them.
class Policy
{
public:
    virtual ~Policy() = default;

    /// Called once after rank estimation with the learned rank.
    virtual void start(Rank learned_rank) = 0;
    virtual void begin_round(Time t, const DominatedView& view) = 0;
    virtual Arm choose_arm(Time t) = 0;
    virtual void observe(const Feedback& feedback) = 0;
    virtual void end_round(Time t) = 0;

    /// Current claim to publish on the board, if any.
    virtual std::optional<Commitment> commitment() const { return std::nullopt; }

    virtual StateTag state() const = 0;
    /// Dominated set the policy is acting on this round.
    virtual ArmSet dominated() const { return {}; }
    /// True when this round is forced exploration.
    virtual bool forced_exploration() const { return false; }
    /// Number of phases started so far.
    virtual std::int64_t phase_count() const { return 0; }
};

} // namespace dncb

#endif // DNCB_POLICY_HPP
