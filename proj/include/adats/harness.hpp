#pragma once

#include "adats/agents.hpp"
#include "adats/gauss_core.hpp"
#include "adats/hierarchy.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <exception>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace adats {

class EmptyTrace : public std::runtime_error {
public:
    explicit EmptyTrace(const std::string& what) : std::runtime_error(what) {}
};

struct ExperimentConfig {
    EnvironmentSpec spec;
    std::vector<AgentSpec> agents;
    std::size_t tasks = 20;   // m
    std::size_t rounds = 200; // n
    std::size_t runs = 100;
    std::uint64_t seed = 0;
    bool common_tasks = true;
    std::size_t threads = 1;

    void validate() const {
        if (tasks < 1 || rounds < 1 || runs < 1) throw std::invalid_argument("tasks, rounds and runs must be >= 1");
        if (agents.empty()) throw std::invalid_argument("no agents configured");
        spec.validate();
    }
};

enum class StreamPurpose : std::uint64_t { Environment = 1, Agent = 2, Reward = 3 };

/// Environment streams ignore the agent when tasks are shared, so every agent
/// faces the same (μ*, θ_1..θ_m); agent and reward streams never do.
inline std::uint64_t stream_id(const ExperimentConfig& cfg, std::size_t run, std::size_t agent_index,
                               StreamPurpose purpose) {
    const bool shared = purpose == StreamPurpose::Environment && cfg.common_tasks;
    return hash_stream(run, shared ? std::size_t{0} : agent_index + 1, static_cast<std::uint64_t>(purpose));
}

/// Everything a run's environment draws before any agent acts.
struct World {
    EnvironmentSpec spec;  // action set materialized
    MetaParameter meta;
    std::vector<TaskInstance> tasks;
};

inline World sample_world(const ExperimentConfig& cfg, std::size_t agent_index, std::size_t run) {
    RngStream rng(cfg.seed, stream_id(cfg, run, agent_index, StreamPurpose::Environment));
    World w;
    w.spec = ensure_exploration_actions(materialize_actions(cfg.spec, rng));
    w.meta = sample_meta_parameter(w.spec, rng);
    w.tasks.reserve(cfg.tasks);
    for (std::size_t s = 0; s < cfg.tasks; ++s) w.tasks.push_back(sample_task(w.spec, w.meta, rng));
    return w;
}

/// FNV-1a over the bit pattern of θ; equal hashes identify shared tasks.
inline std::uint64_t task_hash(const TaskInstance& task) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (Eigen::Index i = 0; i < task.theta.size(); ++i) {
        std::uint64_t bits;
        const double v = task.theta(i);
        std::memcpy(&bits, &v, sizeof bits);
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xFFU;
            h *= 0x100000001B3ULL;
        }
    }
    return h;
}

/// Regret of one (agent, run) in s-major, t-minor order.
struct RunTrace {
    std::size_t agent_index = 0;
    std::size_t run = 0;
    std::vector<double> instant;
    std::vector<double> cumulative;
    std::vector<std::uint64_t> task_hashes;
    bool ok = true;
    std::string error;
    /// Mixture AdaTS/MetaTS: final meta-posterior weight of the true component.
    std::optional<double> true_component_weight;
};

inline RunTrace run_single(const ExperimentConfig& cfg, std::size_t agent_index, std::size_t run) {
    RunTrace trace;
    trace.agent_index = agent_index;
    trace.run = run;
    const auto& agent_spec = cfg.agents.at(agent_index);
    std::size_t s = 0;
    std::size_t t = 0;
    try {
        const World world = sample_world(cfg, agent_index, run);
        RngStream agent_rng(cfg.seed, stream_id(cfg, run, agent_index, StreamPurpose::Agent));
        RngStream reward_rng(cfg.seed, stream_id(cfg, run, agent_index, StreamPurpose::Reward));
        auto agent = make_agent(agent_spec, world.spec, cfg.tasks);
        const TaskContext ctx{&world.meta};

        trace.instant.reserve(cfg.tasks * cfg.rounds);
        trace.cumulative.reserve(cfg.tasks * cfg.rounds);
        double cum = 0.0;
        for (s = 0; s < cfg.tasks; ++s) {
            const auto& task = world.tasks[s];
            trace.task_hashes.push_back(task_hash(task));
            agent->begin_task(s + 1, ctx, agent_rng);
            for (t = 0; t < cfg.rounds; ++t) {
                const Action a = agent->select(agent_rng);
                const Observation obs = realize_reward(world.spec, task, a, reward_rng);
                const double r = instant_regret(world.spec, task, a);
                cum += r;
                trace.instant.push_back(r);
                trace.cumulative.push_back(cum);
                agent->observe(a, obs);
            }
            agent->end_task();
        }
        if (const auto* mix = dynamic_cast<const MixtureAgent*>(agent.get()))
            trace.true_component_weight = mix->meta().weights()(static_cast<Eigen::Index>(world.meta.component));
    } catch (const std::exception& e) {
        trace.ok = false;
        trace.error = "agent " + agent_label(agent_spec) + ", run " + std::to_string(run) + ", task " +
                      std::to_string(s + 1) + ", round " + std::to_string(t + 1) + ": " + e.what();
    }
    return trace;
}

struct ExperimentResult {
    std::vector<std::string> agent_labels;
    std::size_t tasks = 0;
    std::size_t rounds = 0;
    std::size_t runs = 0;
    /// Index agent * runs + run.
    std::vector<RunTrace> traces;

    [[nodiscard]] const RunTrace& trace(std::size_t agent, std::size_t run) const { return traces.at(agent * runs + run); }
    [[nodiscard]] std::vector<std::string> failures() const {
        std::vector<std::string> out;
        for (const auto& t : traces)
            if (!t.ok) out.push_back(t.error);
        return out;
    }
};

/// All (agent, run) units. Each unit writes only its own slot, so the result
/// does not depend on the number of threads or their scheduling.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentResult out;
    for (const auto& a : cfg.agents) out.agent_labels.push_back(agent_label(a));
    out.tasks = cfg.tasks;
    out.rounds = cfg.rounds;
    out.runs = cfg.runs;
    const std::size_t units = cfg.agents.size() * cfg.runs;
    out.traces.resize(units);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t u = next++; u < units; u = next++) out.traces[u] = run_single(cfg, u / cfg.runs, u % cfg.runs);
    };
    const std::size_t threads = std::clamp<std::size_t>(cfg.threads, 1, units);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    }
    return out;
}

/// Pointwise mean and standard error of cumulative regret across runs.
struct AggregateCurve {
    std::vector<std::string> agent_labels;
    std::size_t tasks = 0;
    std::size_t rounds = 0;
    std::vector<std::size_t> runs_used;
    std::vector<std::vector<double>> mean;    // [agent][(s, t)]
    std::vector<std::vector<double>> standard_error; // [agent][(s, t)]

    [[nodiscard]] std::size_t agent_index(const std::string& label) const {
        for (std::size_t i = 0; i < agent_labels.size(); ++i)
            if (agent_labels[i] == label) return i;
        throw UnknownAgent("agent '" + label + "' not in curve");
    }
};

inline AggregateCurve aggregate(const ExperimentResult& result) {
    AggregateCurve curve;
    curve.agent_labels = result.agent_labels;
    curve.tasks = result.tasks;
    curve.rounds = result.rounds;
    const std::size_t cells = result.tasks * result.rounds;
    for (std::size_t a = 0; a < result.agent_labels.size(); ++a) {
        std::vector<const RunTrace*> ok;
        for (std::size_t r = 0; r < result.runs; ++r)
            if (result.trace(a, r).ok) ok.push_back(&result.trace(a, r));
        if (ok.empty()) throw EmptyTrace("no successful runs for agent " + result.agent_labels[a]);
        std::vector<double> mean(cells, 0.0);
        std::vector<double> se(cells, 0.0);
        const double n = static_cast<double>(ok.size());
        for (std::size_t c = 0; c < cells; ++c) {
            double sum = 0.0;
            for (const auto* t : ok) sum += t->cumulative[c];
            const double mu = sum / n;
            double ss = 0.0;
            for (const auto* t : ok) ss += (t->cumulative[c] - mu) * (t->cumulative[c] - mu);
            mean[c] = mu;
            se[c] = ok.size() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
        }
        curve.runs_used.push_back(ok.size());
        curve.mean.push_back(std::move(mean));
        curve.standard_error.push_back(std::move(se));
    }
    return curve;
}

/// Mean cumulative regret at (s = m, t = n).
inline double final_regret(const AggregateCurve& curve, const std::string& label) {
    return curve.mean.at(curve.agent_index(label)).back();
}

inline double final_stderr(const AggregateCurve& curve, const std::string& label) {
    return curve.standard_error.at(curve.agent_index(label)).back();
}

}  // namespace adats
