#include "dncb/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>
#include <openssl/sha.h>

namespace dncb
{

using nlohmann::json;

const char* to_string(AlgorithmKind kind)
{
    switch (kind)
    {
    case AlgorithmKind::kDncb:
        return "dncb";
    case AlgorithmKind::kUcb:
        return "ucb";
    case AlgorithmKind::kUcbD3:
        return "ucb_d3";
    case AlgorithmKind::kSnoozeIt:
        return "snoozeit";
    }
    return "?";
}

namespace
{

void only_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed)
{
    if (!obj.is_object())
        throw ConfigError(path.empty() ? "<root>" : path, "must be an object");
    for (const auto& [key, value] : obj.items())
    {
        bool known = false;
        for (const char* a : allowed)
            known |= key == a;
        if (!known)
            throw ConfigError(path.empty() ? key : path + "." + key, "unknown key");
    }
}

template <typename T>
T get_or(const json& obj, const char* key, const std::string& path, T fallback)
{
    const auto it = obj.find(key);
    if (it == obj.end())
        return fallback;
    try
    {
        return it->get<T>();
    }
    catch (const json::exception&)
    {
        throw ConfigError(path + "." + key, "wrong type");
    }
}

const json& require(const json& obj, const char* key, const std::string& path)
{
    const auto it = obj.find(key);
    if (it == obj.end())
        throw ConfigError(path.empty() ? key : path + "." + key, "missing");
    return *it;
}

AlgorithmKind parse_kind(const json& v, const std::string& path)
{
    if (!v.is_string())
        throw ConfigError(path, "must be a string");
    const auto s = v.get<std::string>();
    for (AlgorithmKind k : {AlgorithmKind::kDncb, AlgorithmKind::kUcb, AlgorithmKind::kUcbD3, AlgorithmKind::kSnoozeIt})
        if (s == to_string(k))
            return k;
    throw ConfigError(path, "unknown algorithm '" + s + "' (expected dncb, ucb, ucb_d3 or snoozeit)");
}

// One row per agent, or a single row shared by every agent.
template <typename Row>
std::vector<Row> per_agent(const json& v, const std::string& path, int agents, auto&& parse_row)
{
    if (!v.is_array() || v.empty())
        throw ConfigError(path, "must be a non-empty array");
    if (v.size() != 1 && static_cast<int>(v.size()) != agents)
        throw ConfigError(path, "needs one entry per agent or a single shared entry");
    std::vector<Row> out;
    for (int j = 0; j < agents; ++j)
    {
        const std::size_t src = v.size() == 1 ? 0 : static_cast<std::size_t>(j);
        out.push_back(parse_row(v[src], path + "[" + std::to_string(src) + "]"));
    }
    return out;
}

void parse_environment(const json& env, ExperimentConfig& cfg)
{
    const std::string p = "environment";
    only_keys(env, p, {"agents", "arms", "horizon", "noise_sigma", "noise_variance", "drift"});
    cfg.dims.agents = require(env, "agents", p).get<int>();
    cfg.dims.arms = require(env, "arms", p).get<int>();
    cfg.dims.horizon = require(env, "horizon", p).get<Time>();
    if (cfg.dims.agents < 1)
        throw ConfigError(p + ".agents", "must be >= 1");
    if (cfg.dims.arms < cfg.dims.agents)
        throw ConfigError(p + ".arms", "k must be >= N");
    if (cfg.dims.arms > kMaxArms)
        throw ConfigError(p + ".arms", "at most " + std::to_string(kMaxArms) + " arms supported");
    if (cfg.dims.horizon < 1)
        throw ConfigError(p + ".horizon", "must be >= 1");

    if (env.contains("noise_sigma") && env.contains("noise_variance"))
        throw ConfigError(p + ".noise_sigma", "give noise_sigma or noise_variance, not both");
    if (env.contains("noise_variance"))
    {
        const double var = get_or(env, "noise_variance", p, 0.4);
        if (!(var >= 0.0))
            throw ConfigError(p + ".noise_variance", "must be >= 0");
        cfg.noise_sigma = std::sqrt(var);
    }
    else
    {
        cfg.noise_sigma = get_or(env, "noise_sigma", p, std::sqrt(0.4));
    }
    if (!(cfg.noise_sigma >= 0.0))
        throw ConfigError(p + ".noise_sigma", "must be >= 0");

    const std::string dp = p + ".drift";
    const json& drift = require(env, "drift", p);
    only_keys(drift, dp, {"kind", "step", "init", "keyframes"});
    const auto kind = get_or<std::string>(drift, "kind", dp, "random_walk");
    if (kind == "constant")
        cfg.drift.kind = DriftKind::kConstant;
    else if (kind == "random_walk")
        cfg.drift.kind = DriftKind::kRandomWalk;
    else if (kind == "custom")
        cfg.drift.kind = DriftKind::kCustom;
    else
        throw ConfigError(dp + ".kind", "expected constant, random_walk or custom");
    cfg.drift.step = get_or(drift, "step", dp, 0.0);
    if (!(cfg.drift.step >= 0.0 && cfg.drift.step <= 1.0))
        throw ConfigError(dp + ".step", "must lie in [0, 1]");

    const int n = cfg.dims.agents;
    const int k = cfg.dims.arms;
    if (drift.contains("init") && !(drift["init"].is_string() && drift["init"] == "uniform"))
    {
        cfg.drift.init = per_agent<std::vector<double>>(
            drift["init"], dp + ".init", n, [k](const json& row, const std::string& path) {
                if (!row.is_array() || static_cast<int>(row.size()) != k)
                    throw ConfigError(path, "needs one mean per arm");
                std::vector<double> out;
                for (const auto& v : row)
                {
                    if (!v.is_number())
                        throw ConfigError(path, "means must be numbers");
                    const double m = v.get<double>();
                    if (!(m >= 0.0 && m <= 1.0))
                        throw ConfigError(path, "means must lie in [0, 1]");
                    out.push_back(m);
                }
                return out;
            });
    }
    if (cfg.drift.kind == DriftKind::kCustom)
    {
        using ArmFrames = std::vector<std::vector<Keyframe>>;
        cfg.drift.keyframes = per_agent<ArmFrames>(
            require(drift, "keyframes", dp), dp + ".keyframes", n, [k](const json& row, const std::string& path) {
                if (!row.is_array() || static_cast<int>(row.size()) != k)
                    throw ConfigError(path, "needs one keyframe list per arm");
                ArmFrames out;
                for (std::size_t a = 0; a < row.size(); ++a)
                {
                    const std::string ap = path + "[" + std::to_string(a) + "]";
                    std::vector<Keyframe> frames;
                    if (!row[a].is_array())
                        throw ConfigError(ap, "must be a list of [t, value] pairs");
                    for (const auto& kf : row[a])
                    {
                        if (!kf.is_array() || kf.size() != 2 || !kf[0].is_number() || !kf[1].is_number())
                            throw ConfigError(ap, "keyframes are [t, value] pairs");
                        frames.push_back(Keyframe{kf[0].get<Time>(), kf[1].get<double>()});
                    }
                    out.push_back(std::move(frames));
                }
                return out;
            });
    }
    else if (drift.contains("keyframes"))
    {
        throw ConfigError(dp + ".keyframes", "only valid with kind = custom");
    }
}

void parse_algorithm(const json& alg, ExperimentConfig& cfg)
{
    const std::string p = "algorithm";
    only_keys(alg, p, {"name", "delta", "c0", "c1", "window_base", "radius", "max_subset_tests", "phase_base"});
    auto& a = cfg.algorithm;
    if (alg.contains("name"))
        a.name = parse_kind(alg["name"], p + ".name");
    a.delta = get_or(alg, "delta", p, cfg.drift.step);
    a.c0 = get_or(alg, "c0", p, 8.0);
    a.test.c1 = get_or(alg, "c1", p, 32.0);
    a.test.window_base = get_or(alg, "window_base", p, 2);
    a.max_subset_tests = get_or<std::size_t>(alg, "max_subset_tests", p, 0);
    a.phase_base = get_or<Time>(alg, "phase_base", p, 32);
    const auto radius = get_or<std::string>(alg, "radius", p, "definition");
    if (radius == "definition")
        a.test.radius = stats::RadiusRule::kDefinition;
    else if (radius == "good_event")
        a.test.radius = stats::RadiusRule::kGoodEvent;
    else
        throw ConfigError(p + ".radius", "expected definition or good_event");
    if (!(a.delta >= 0.0))
        throw ConfigError(p + ".delta", "must be >= 0");
    if (!(a.c0 > 0.0))
        throw ConfigError(p + ".c0", "must be > 0");
    if (!(a.test.c1 > 0.0))
        throw ConfigError(p + ".c1", "must be > 0");
    if (a.test.window_base < 2)
        throw ConfigError(p + ".window_base", "must be >= 2");
    if (a.phase_base < 1)
        throw ConfigError(p + ".phase_base", "must be >= 1");
}

void check_algorithm_fits(AlgorithmKind kind, const ExperimentConfig& cfg, const std::string& path)
{
    if (kind == AlgorithmKind::kUcbD3 && cfg.episode.comm != CommMode::kBlackboard)
        throw ConfigError(path, "ucb_d3 needs comm.mode = blackboard");
}

} // namespace

ExperimentConfig parse_config(const std::string& text)
{
    json root;
    try
    {
        root = json::parse(text);
    }
    catch (const json::parse_error& e)
    {
        std::size_t line = 1;
        std::size_t col = 1;
        const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < end; ++i)
        {
            if (text[i] == '\n')
            {
                ++line;
                col = 1;
            }
            else
            {
                ++col;
            }
        }
        throw ConfigError("", "parse error at line " + std::to_string(line) + ", column " + std::to_string(col) +
                                  ": " + e.what());
    }

    ExperimentConfig cfg;
    try
    {
        only_keys(root, "", {"environment", "algorithm", "compare", "comm", "runs", "output", "gap"});
        parse_environment(require(root, "environment", ""), cfg);
        parse_algorithm(root.contains("algorithm") ? root["algorithm"] : json::object(), cfg);

        if (root.contains("comm"))
        {
            const json& comm = root["comm"];
            only_keys(comm, "comm", {"mode", "winner_index", "drift_check_c", "regret_during_rank_estimation"});
            const auto mode = get_or<std::string>(comm, "mode", "comm", "blackboard");
            if (mode == "blackboard")
                cfg.episode.comm = CommMode::kBlackboard;
            else if (mode == "collision")
                cfg.episode.comm = CommMode::kCollision;
            else
                throw ConfigError("comm.mode", "expected blackboard or collision");
            cfg.episode.winner_index = get_or(comm, "winner_index", "comm", false);
            cfg.drift_check_c = get_or(comm, "drift_check_c", "comm", 0.5);
            cfg.episode.regret_during_rank_estimation =
                get_or(comm, "regret_during_rank_estimation", "comm", true);
            if (!(cfg.drift_check_c > 0.0))
                throw ConfigError("comm.drift_check_c", "must be > 0");
        }
        if (cfg.episode.comm == CommMode::kCollision && cfg.dims.agents >= 3 && !cfg.episode.winner_index)
            throw ConfigError("comm.winner_index", "collision mode with N >= 3 needs the winner-index reward model");

        check_algorithm_fits(cfg.algorithm.name, cfg, "algorithm.name");
        if (root.contains("compare"))
        {
            const json& list = root["compare"];
            if (!list.is_array() || list.size() < 2)
                throw ConfigError("compare", "needs at least two algorithms");
            for (std::size_t i = 0; i < list.size(); ++i)
            {
                const std::string path = "compare[" + std::to_string(i) + "]";
                cfg.compare.push_back(parse_kind(list[i], path));
                check_algorithm_fits(cfg.compare.back(), cfg, path);
            }
        }

        if (root.contains("runs"))
        {
            const json& runs = root["runs"];
            only_keys(runs, "runs", {"count", "base_seed"});
            cfg.runs = get_or(runs, "count", "runs", 10);
            cfg.base_seed = get_or<std::uint64_t>(runs, "base_seed", "runs", 1);
            if (cfg.runs < 1)
                throw ConfigError("runs.count", "must be >= 1");
        }
        if (root.contains("output"))
        {
            const json& out = root["output"];
            only_keys(out, "output", {"dir", "traces", "views", "aggregate_stride"});
            cfg.output.dir = get_or<std::string>(out, "dir", "output", "out");
            cfg.output.traces = get_or(out, "traces", "output", false);
            cfg.output.views = get_or(out, "views", "output", false);
            cfg.output.aggregate_stride = get_or<Time>(out, "aggregate_stride", "output", 1);
            if (cfg.output.aggregate_stride < 1)
                throw ConfigError("output.aggregate_stride", "must be >= 1");
        }
        cfg.episode.record_views = cfg.output.views;
        if (root.contains("gap"))
        {
            const json& gap = root["gap"];
            only_keys(gap, "gap", {"stride", "grid_step"});
            cfg.gap.stride = get_or<Time>(gap, "stride", "gap", 100);
            cfg.gap.grid_step = get_or(gap, "grid_step", "gap", 1e-3);
            if (cfg.gap.stride < 1)
                throw ConfigError("gap.stride", "must be >= 1");
            if (!(cfg.gap.grid_step > 0.0 && cfg.gap.grid_step <= 1.0))
                throw ConfigError("gap.grid_step", "must lie in (0, 1]");
        }
    }
    catch (const json::exception& e)
    {
        throw ConfigError("", std::string("malformed value: ") + e.what());
    }

    cfg.canonical = root.dump();
    return cfg;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("", "cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string git_blob_sha1(const std::string& bytes)
{
    std::string blob = "blob " + std::to_string(bytes.size());
    blob.push_back('\0');
    blob += bytes;
    unsigned char digest[SHA_DIGEST_LENGTH];
    SHA1(reinterpret_cast<const unsigned char*>(blob.data()), blob.size(), digest);
    std::string hex;
    char buf[3];
    for (unsigned char c : digest)
    {
        std::snprintf(buf, sizeof buf, "%02x", c);
        hex += buf;
    }
    return hex;
}

std::string config_hash(const ExperimentConfig& config)
{
    return git_blob_sha1(config.canonical);
}

} // namespace dncb
