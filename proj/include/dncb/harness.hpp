#ifndef DNCB_HARNESS_HPP
#define DNCB_HARNESS_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dncb/config.hpp"
#include "dncb/sim.hpp"

namespace dncb
{

/// Lower nearest rank: the ceil(q n)-th smallest value (1-based), q in [0, 1].
double lower_quantile(std::span<const double> values, double q);

struct AggregateRow
{
    Time t = 0;
    Rank rank = 0;
    double median = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
};

/// Cumulative regret sampled on a time grid, one series per run.
struct RegretSamples
{
    int agents = 0;
    std::vector<Time> times;
    /// samples[run][time index * agents + agent]
    std::vector<std::vector<double>> samples;
};

/// Per-(t, rank) median and quartiles across runs. Order of runs does not matter.
std::vector<AggregateRow> aggregate(const RegretSamples& samples);

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows);

/// Sampling grid {stride, 2 stride, ...} plus T.
std::vector<Time> sample_times(Time horizon, Time stride);

struct RunSummary
{
    std::uint64_t seed = 0;
    std::vector<Rank> learned_rank;
    std::vector<double> final_regret;
    std::vector<std::int64_t> phase_count;
    std::vector<std::int64_t> forced_rounds;
    std::int64_t board_reads = 0;
};

struct ExperimentResult
{
    AlgorithmKind algorithm = AlgorithmKind::kDncb;
    std::vector<RunSummary> runs;
    RegretSamples samples;
    std::vector<AggregateRow> aggregate;
    std::vector<std::string> warnings;
    std::string config_hash;

    /// Median over runs of each agent's final regret.
    std::vector<double> median_final_regret() const;
};

/// An episode threw; carries the offending seed.
class EpisodeFailure : public std::runtime_error
{
public:
    EpisodeFailure(std::uint64_t seed, const std::string& what)
        : std::runtime_error("episode with seed " + std::to_string(seed) + " failed: " + what), seed_(seed)
    {
    }
    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
};

/// Policy factory for one algorithm under a config.
PolicyFactory make_policy_factory(const ExperimentConfig& config, AlgorithmKind kind);

/// Worker count from DNCB_WORKERS, else the hardware concurrency (at least 1).
int worker_count();

struct RunOptions
{
    /// Directory for aggregate.csv, summary.json and traces/; empty writes nothing.
    std::string out_dir;
    int workers = 0; ///< 0: worker_count()
};

/// `config.runs` episodes of `kind` with seeds base, base + 1, ...
ExperimentResult run_experiment(const ExperimentConfig& config, AlgorithmKind kind, const RunOptions& options = {});

/// Paired comparison: every algorithm sees the same trajectory and reward streams per seed.
/// Each algorithm writes under out_dir/<name>/ (suffixed when listed twice).
std::vector<ExperimentResult> compare_algorithms(const ExperimentConfig& config, const RunOptions& options = {});

void write_summary_json(std::ostream& out, const ExperimentResult& result);

/// Dynamic-gap diagnostics on the first seed's trajectory: rows t, rank, dominated_mask, lambda
/// for every dominated set of at most rank - 1 arms leaving two or more arms.
void write_gap_csv(std::ostream& out, const ExperimentConfig& config);

} // namespace dncb

#endif // DNCB_HARNESS_HPP
