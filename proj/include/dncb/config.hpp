#ifndef DNCB_CONFIG_HPP
#define DNCB_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dncb/comm.hpp"
#include "dncb/env.hpp"
#include "dncb/sim.hpp"
#include "dncb/stats.hpp"

namespace dncb
{

enum class AlgorithmKind
{
    kDncb,
    kUcb,
    kUcbD3,
    kSnoozeIt,
};

const char* to_string(AlgorithmKind kind);

struct AlgorithmConfig
{
    AlgorithmKind name = AlgorithmKind::kDncb;
    /// Drift limit assumed by DNCB; defaults to the environment's drift step.
    double delta = 0.0;
    double c0 = 8.0;
    stats::TestParams test;
    std::size_t max_subset_tests = 0;
    Time phase_base = 32;
};

struct OutputConfig
{
    std::string dir = "out";
    bool traces = false;
    bool views = false;
    Time aggregate_stride = 1;
};

struct GapConfig
{
    Time stride = 100;
    double grid_step = 1e-3;
};

struct ExperimentConfig
{
    Dimensions dims;
    double noise_sigma = 0.0;
    DriftModel drift;

    AlgorithmConfig algorithm;
    /// Algorithms of a paired comparison; empty unless the config lists them.
    std::vector<AlgorithmKind> compare;

    EpisodeOptions episode;
    double drift_check_c = 0.5;

    int runs = 10;
    std::uint64_t base_seed = 1;

    OutputConfig output;
    GapConfig gap;

    /// Canonical (sorted-key, compact) JSON of the validated input.
    std::string canonical;
};

/// Parse and validate config text. Throws ConfigError carrying "line L, column C"
/// for syntax errors and a dotted field path for semantic ones. Unknown keys are errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Git-style blob SHA-1 of the canonical config, lowercase hex.
std::string config_hash(const ExperimentConfig& config);

/// Git blob id of arbitrary bytes: sha1("blob <len>\0" + bytes).
std::string git_blob_sha1(const std::string& bytes);

} // namespace dncb

#endif // DNCB_CONFIG_HPP
