#include "dncb/dncb_agent.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dncb
{

bool same_phase(const PhaseState& a, const PhaseState& b)
{
    if (a.index() != b.index())
        return false;
    if (const auto* ea = std::get_if<ExploreMinus>(&a))
        return ea->dominated == std::get<ExploreMinus>(b).dominated;
    return std::get<Exploit>(a).arm == std::get<Exploit>(b).arm;
}

void CommitCache::insert(ArmSet omega, Arm arm, Time expiry)
{
    auto& list = entries_[omega];
    for (Commitment& c : list)
    {
        if (c.arm == arm)
        {
            c.until = std::max(c.until, expiry);
            return;
        }
    }
    list.push_back(Commitment{arm, expiry});
}

void CommitCache::purge(Time t)
{
    for (auto it = entries_.begin(); it != entries_.end();)
    {
        auto& list = it->second;
        std::erase_if(list, [t](const Commitment& c) { return c.until <= t; });
        it = list.empty() ? entries_.erase(it) : std::next(it);
    }
}

std::optional<Commitment> CommitCache::best(ArmSet omega, Time t) const
{
    const auto it = entries_.find(omega);
    if (it == entries_.end())
        return std::nullopt;
    std::optional<Commitment> out;
    for (const Commitment& c : it->second)
    {
        if (c.until <= t)
            continue;
        if (!out || c.until > out->until || (c.until == out->until && c.arm < out->arm))
            out = c;
    }
    return out;
}

bool CommitCache::has_live_superset(ArmSet dominated, int size, Time t) const
{
    for (const auto& [omega, list] : entries_)
    {
        if (omega.size() != size || !dominated.is_subset_of(omega))
            continue;
        for (const Commitment& c : list)
            if (c.until > t)
                return true;
    }
    return false;
}

const std::vector<Commitment>* CommitCache::find(ArmSet omega) const
{
    const auto it = entries_.find(omega);
    return it == entries_.end() ? nullptr : &it->second;
}

std::optional<Time> commit_expiry(Time phase_start, Time tau, int active_arms, double delta, Time horizon,
                                  Time view_expiry)
{
    const double buf = stats::buffer_length(static_cast<double>(tau), active_arms, delta, horizon);
    if (!(buf > static_cast<double>(tau)))
        return std::nullopt;
    const double end = static_cast<double>(phase_start) + std::floor(buf);
    const Time expiry = end >= static_cast<double>(horizon + 1) ? horizon + 1 : static_cast<Time>(end);
    return std::min(expiry, view_expiry);
}

DncbAgent::DncbAgent(DncbParams params)
    : params_(params), history_(params.n_arms), phase_base_(static_cast<std::size_t>(params.n_arms), 0)
{
    if (params_.n_arms < 1 || params_.n_arms > kMaxArms)
        throw ConfigError("environment.arms", "out of range");
    if (params_.horizon < 1)
        throw ConfigError("environment.horizon", "must be >= 1");
    if (!(params_.delta >= 0.0))
        throw ConfigError("algorithm.delta", "must be >= 0");
}

void DncbAgent::start(Rank learned_rank)
{
    rank_ = params_.solo ? 1 : learned_rank;
    if (rank_ < 1 || rank_ > params_.n_arms)
        throw ProtocolError("DncbAgent::start: learned rank " + std::to_string(learned_rank) + " exceeds arm count");
    started_ = true;
}

void DncbAgent::start_phase(Time t)
{
    ++phase_index_;
    phase_start_ = t;
    for (Arm a = 0; a < params_.n_arms; ++a)
        phase_base_[static_cast<std::size_t>(a)] = history_.pulls(a);
}

void DncbAgent::update_state(Time t, const DominatedView& incoming)
{
    if (!started_)
        throw ProtocolError("DncbAgent::update_state before start()");
    const DominatedView view = params_.solo ? DominatedView{} : incoming;
    const ArmSet c = view.arms;
    const int need = rank_ - 1;
    if (c.size() > need)
        throw ProtocolError("round " + std::to_string(t) + ", rank " + std::to_string(rank_) +
                            ": dominated set has " + std::to_string(c.size()) + " arms, at most " +
                            std::to_string(need) + " allowed");
    cache_.purge(t);
    view_expiry_ = view.min_expiry;

    PhaseState next = ExploreMinus{c};
    if (c.size() == need)
    {
        const ArmSet free = ArmSet::all(params_.n_arms).minus(c);
        const auto* current = std::get_if<Exploit>(&phase_);
        if (current && phase_index_ > 0 && current->dominated == c && std::min(current->until, view.min_expiry) > t)
        {
            next = Exploit{current->arm, std::min(current->until, view.min_expiry), c};
        }
        else if (free.size() == 1)
        {
            // Nothing left to compare: hold the sole arm as long as the ranks above allow.
            next = Exploit{free.nth(0), std::min(params_.horizon + 1, view.min_expiry), c};
        }
        else if (const auto hit = cache_.best(c, t))
        {
            const Time until = std::min(hit->until, view.min_expiry);
            if (until > t)
                next = Exploit{hit->arm, until, c};
        }
    }

    if (phase_index_ == 0 || !same_phase(phase_, next))
        start_phase(t);
    phase_ = next;

    forced_ = false;
    if (const auto* explore = std::get_if<ExploreMinus>(&phase_))
    {
        rebuild_test_sets(explore->dominated);
        forced_ = explore->dominated.size() < need && cache_.has_live_superset(explore->dominated, need, t);
    }
    forced_rounds_ += forced_ ? 1 : 0;
}

void DncbAgent::rebuild_test_sets(ArmSet dominated)
{
    if (test_sets_valid_ && test_sets_for_ == dominated)
        return;
    test_sets_.clear();
    test_sets_for_ = dominated;
    test_sets_valid_ = true;

    const std::vector<Arm> free = ArmSet::all(params_.n_arms).minus(dominated).to_vector();
    const int pick = rank_ - 1 - dominated.size();
    const int n = static_cast<int>(free.size());
    if (pick < 0 || pick > n)
        return;
    // Lexicographic combinations of `pick` positions out of `free`.
    std::vector<int> idx(static_cast<std::size_t>(pick));
    for (int i = 0; i < pick; ++i)
        idx[static_cast<std::size_t>(i)] = i;
    while (true)
    {
        ArmSet omega = dominated;
        for (int i : idx)
            omega.insert(free[static_cast<std::size_t>(i)]);
        test_sets_.push_back(omega);
        if (params_.max_subset_tests != 0 && test_sets_.size() >= params_.max_subset_tests)
            return;
        int i = pick - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - pick + i)
            --i;
        if (i < 0)
            return;
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < pick; ++j)
            idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
}

Arm DncbAgent::pull(Time t) const
{
    if (const auto* ex = std::get_if<Exploit>(&phase_))
        return ex->arm;
    const ArmSet c = std::get<ExploreMinus>(phase_).dominated;
    const ArmSet free = ArmSet::all(params_.n_arms).minus(c);
    const Time m = free.size();
    const Time offset = rank_ - c.size() - 1;
    return free.nth(static_cast<int>(((t + offset) % m + m) % m));
}

void DncbAgent::observe(const Feedback& feedback)
{
    if (feedback.matched)
        history_.record(feedback.arm, feedback.t, feedback.reward);
}

void DncbAgent::test_and_commit(Time t)
{
    const auto* explore = std::get_if<ExploreMinus>(&phase_);
    if (!explore)
        return;
    const Time tau = t - phase_start_;
    if (tau < 1)
        return;

    const int active = params_.n_arms - explore->dominated.size();
    const auto expiry =
        commit_expiry(phase_start_, tau, active, params_.delta, params_.horizon, view_expiry_);
    const ArmSet all = ArmSet::all(params_.n_arms);

    bool reset = false;
    for (const ArmSet omega : test_sets_)
    {
        const ArmSet candidates = all.minus(omega);
        if (candidates.size() < 2)
            continue; // sole remaining arm is handled in update_state
        const auto outcome = stats::optimality_test(history_, candidates, t, params_.horizon, params_.delta,
                                                    params_.test, phase_base_);
        if (!outcome)
            continue;
        if (expiry)
            cache_.insert(omega, outcome->winner, *expiry);
        else
            reset = true;
    }
    if (reset)
    {
        ++failed_commits_;
        start_phase(t);
    }
}

std::optional<Commitment> DncbAgent::commitment() const
{
    if (const auto* ex = std::get_if<Exploit>(&phase_))
        return Commitment{ex->arm, ex->until};
    return std::nullopt;
}

StateTag DncbAgent::state() const
{
    return std::holds_alternative<Exploit>(phase_) ? StateTag::kExploit : StateTag::kExplore;
}

ArmSet DncbAgent::dominated() const
{
    return std::visit([](const auto& s) { return s.dominated; }, phase_);
}

} // namespace dncb
