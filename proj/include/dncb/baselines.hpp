#ifndef DNCB_BASELINES_HPP
#define DNCB_BASELINES_HPP

#include <cstdint>
#include <vector>

#include "dncb/policy.hpp"

namespace dncb
{

/// Stationary UCB over all arms: index mean + sqrt(2 ln t / n), unpulled arms first.
///
/// Ignores rank and the dominated view. A blocked pull counts as a zero
/// reward, so a contested arm's index decays instead of staying pinned.
class UcbAgent final : public Policy
{
public:
    explicit UcbAgent(int n_arms);

    void start(Rank) override {}
    void begin_round(Time, const DominatedView&) override {}
    Arm choose_arm(Time t) override;
    void observe(const Feedback& feedback) override;
    void end_round(Time) override {}
    StateTag state() const override { return StateTag::kIndex; }

    std::int64_t pulls(Arm a) const { return counts_[static_cast<std::size_t>(a)]; }

private:
    std::vector<std::int64_t> counts_;
    std::vector<double> sums_;
};

/// UCB index over a candidate set; counts of zero rank first (lowest arm).
Arm ucb_select(ArmSet candidates, const std::vector<std::int64_t>& counts, const std::vector<double>& sums,
               Time t);

struct UcbD3Params
{
    int n_arms = 2;
    /// Length of the first phase; phase p lasts base * 2^p rounds.
    Time phase_base = 32;
};

/// Phased UCB with dominated-arm deletion, in the style of UCB-D3.
///
/// Phases double in length. At each phase boundary the agent posts the arm it
/// matched most often in the previous phase (outside its new dominated set) as
/// a commitment until the phase end, and freezes the dominated set to the view
/// at that boundary. Within a phase it plays UCB on matched-pull statistics
/// over the non-dominated arms it has not been blocked on this phase.
class UcbD3Agent final : public Policy
{
public:
    explicit UcbD3Agent(UcbD3Params params);

    void start(Rank) override { started_ = true; }
    void begin_round(Time t, const DominatedView& view) override;
    Arm choose_arm(Time t) override;
    void observe(const Feedback& feedback) override;
    void end_round(Time) override {}

    std::optional<Commitment> commitment() const override { return posted_; }
    StateTag state() const override { return StateTag::kIndex; }
    ArmSet dominated() const override { return dominated_; }
    std::int64_t phase_count() const override { return phase_; }

    Time phase_end() const { return phase_end_; }

private:
    UcbD3Params params_;
    bool started_ = false;
    std::int64_t phase_ = 0;
    Time phase_end_ = 0;
    ArmSet dominated_;
    ArmSet blocked_;
    std::optional<Commitment> posted_;
    std::vector<std::int64_t> counts_;
    std::vector<double> sums_;
    std::vector<std::int64_t> phase_matches_;
};

} // namespace dncb

#endif // DNCB_BASELINES_HPP
