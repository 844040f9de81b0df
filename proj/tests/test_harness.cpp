#include "adats/harness.hpp"

#include <gtest/gtest.h>

using namespace adats;

namespace {

ExperimentConfig small_config(EnvironmentSpec spec, std::vector<AgentSpec> agents) {
    ExperimentConfig cfg;
    cfg.spec = std::move(spec);
    cfg.agents = std::move(agents);
    cfg.tasks = 4;
    cfg.rounds = 25;
    cfg.runs = 6;
    cfg.seed = 17;
    return cfg;
}

const std::vector<AgentSpec> kFour{{AgentKind::AgnosticTS, 1.0},
                                   {AgentKind::OracleTS, 1.0},
                                   {AgentKind::MetaTS, 1.0},
                                   {AgentKind::AdaTS, 1.0}};

}  // namespace

TEST(RunSingle, TraceHasOneCellPerRound) {
    const auto cfg = small_config(gaussian_bandit(2, 0.5, 0.1, 1.0), kFour);
    for (std::size_t a = 0; a < cfg.agents.size(); ++a) {
        const auto tr = run_single(cfg, a, 0);
        ASSERT_TRUE(tr.ok) << tr.error;
        EXPECT_EQ(tr.instant.size(), cfg.tasks * cfg.rounds);
        EXPECT_EQ(tr.task_hashes.size(), cfg.tasks);
        double cum = 0.0;
        for (std::size_t c = 0; c < tr.instant.size(); ++c) {
            ASSERT_GE(tr.instant[c], 0.0);
            cum += tr.instant[c];
            ASSERT_EQ(tr.cumulative[c], cum);
        }
    }
}

TEST(RunSingle, DeterministicPerSeedRunAgent) {
    auto cfg = small_config(linear_bandit(2, 10, 1.0, 0.1, 1.0), kFour);
    const auto a = run_single(cfg, 3, 2);
    const auto b = run_single(cfg, 3, 2);
    EXPECT_EQ(a.instant, b.instant);
    cfg.seed = 18;
    EXPECT_NE(run_single(cfg, 3, 2).instant, a.instant);
}

TEST(RunSingle, OracleWithoutTaskNoiseHasNoRegret) {
    const auto cfg = small_config(gaussian_bandit(3, 1.0, 0.0, 1.0), {{AgentKind::OracleTS, 1.0}});
    const auto tr = run_single(cfg, 0, 0);
    ASSERT_TRUE(tr.ok);
    for (double r : tr.instant) ASSERT_EQ(r, 0.0);
}

TEST(RunSingle, FailureNamesAgentRunTaskRound) {
    auto cfg = small_config(gaussian_bandit(2, 0.5, 0.1, 1.0), {{AgentKind::MisassignedTS, 1.0}});
    const auto tr = run_single(cfg, 0, 3);
    EXPECT_FALSE(tr.ok);
    EXPECT_NE(tr.error.find("misassigned-ts"), std::string::npos);
    EXPECT_NE(tr.error.find("run 3"), std::string::npos);
    EXPECT_NE(tr.error.find("task 1"), std::string::npos);
}

TEST(RunExperiment, CommonTasksShareTheta) {
    auto cfg = small_config(semi_bandit(5, 2, 0.5, 0.1, 1.0), kFour);
    auto result = run_experiment(cfg);
    for (std::size_t r = 0; r < cfg.runs; ++r)
        for (std::size_t a = 1; a < cfg.agents.size(); ++a)
            EXPECT_EQ(result.trace(a, r).task_hashes, result.trace(0, r).task_hashes);
    EXPECT_NE(result.trace(0, 0).task_hashes, result.trace(0, 1).task_hashes);

    cfg.common_tasks = false;
    result = run_experiment(cfg);
    EXPECT_NE(result.trace(1, 0).task_hashes, result.trace(0, 0).task_hashes);
}

TEST(RunExperiment, ThreadCountDoesNotChangeResults) {
    auto cfg = small_config(linear_bandit(2, 10, 1.0, 0.1, 1.0),
                            {{AgentKind::AdaTS, 1.0}, {AgentKind::AdaTSForced, 1.0}, {AgentKind::MetaTS, 1.0}});
    const auto serial = run_experiment(cfg);
    cfg.threads = 8;
    const auto parallel = run_experiment(cfg);
    ASSERT_EQ(serial.traces.size(), parallel.traces.size());
    for (std::size_t i = 0; i < serial.traces.size(); ++i) {
        EXPECT_EQ(serial.traces[i].instant, parallel.traces[i].instant);
        EXPECT_EQ(serial.traces[i].task_hashes, parallel.traces[i].task_hashes);
    }
}

TEST(RunExperiment, ShapeAndFailures) {
    const auto cfg = small_config(gaussian_bandit(2, 0.5, 0.1, 1.0), {{AgentKind::AdaTS, 1.0}});
    auto one = cfg;
    one.runs = 1;
    const auto r = run_experiment(one);
    EXPECT_EQ(r.traces.size(), 1U);
    EXPECT_TRUE(r.failures().empty());

    auto bad = cfg;
    bad.agents.push_back({AgentKind::MisassignedTS, 1.0});
    const auto rb = run_experiment(bad);
    EXPECT_EQ(rb.failures().size(), cfg.runs);
    EXPECT_TRUE(rb.trace(0, 0).ok);
}

TEST(RunExperiment, InvalidConfigThrows) {
    auto cfg = small_config(gaussian_bandit(2, 0.5, 0.1, 1.0), kFour);
    cfg.rounds = 0;
    EXPECT_THROW(run_experiment(cfg), std::invalid_argument);
    cfg = small_config(gaussian_bandit(2, 0.5, 0.1, 1.0), {});
    EXPECT_THROW(run_experiment(cfg), std::invalid_argument);
}

TEST(RunExperiment, MixtureTracksTrueComponentWeight) {
    auto cfg = small_config(alternating_beta_mixture(3, 2), {{AgentKind::AdaTS, 1.0}, {AgentKind::MisassignedTS, 1.0}});
    const auto result = run_experiment(cfg);
    ASSERT_TRUE(result.failures().empty());
    ASSERT_TRUE(result.trace(0, 0).true_component_weight.has_value());
    EXPECT_GT(*result.trace(0, 0).true_component_weight, 0.5);
}

TEST(Aggregate, HandExample) {
    ExperimentResult r;
    r.agent_labels = {"ada-ts"};
    r.tasks = 1;
    r.rounds = 1;
    r.runs = 2;
    r.traces = {RunTrace{0, 0, {1.0}, {1.0}, {}, true, {}, {}}, RunTrace{0, 1, {3.0}, {3.0}, {}, true, {}, {}}};
    const auto c = aggregate(r);
    EXPECT_DOUBLE_EQ(final_regret(c, "ada-ts"), 2.0);
    EXPECT_NEAR(final_stderr(c, "ada-ts"), 1.0, 1e-15);
    EXPECT_THROW(final_regret(c, "ts"), UnknownAgent);
}

TEST(Aggregate, SingleRunAndConstantTraces) {
    ExperimentResult r;
    r.agent_labels = {"ts"};
    r.tasks = 1;
    r.rounds = 2;
    r.runs = 3;
    for (std::size_t i = 0; i < 3; ++i) r.traces.push_back(RunTrace{0, i, {0.5, 0.5}, {0.5, 1.0}, {}, true, {}, {}});
    auto c = aggregate(r);
    EXPECT_EQ(c.mean[0], (std::vector<double>{0.5, 1.0}));
    EXPECT_EQ(c.standard_error[0], (std::vector<double>{0.0, 0.0}));

    r.traces[1].ok = false;
    r.traces[2].ok = false;
    c = aggregate(r);
    EXPECT_EQ(c.runs_used[0], 1U);
    EXPECT_EQ(final_stderr(c, "ts"), 0.0);

    r.traces[0].ok = false;
    EXPECT_THROW(aggregate(r), EmptyTrace);
}

TEST(HarnessProperty, NoAgentBeatsOracleByTwoStderr) {
    auto cfg = small_config(gaussian_bandit(2, 0.5, 0.1, 1.0), kFour);
    cfg.tasks = 10;
    cfg.rounds = 100;
    cfg.runs = 40;
    const auto curve = aggregate(run_experiment(cfg));
    const double oracle = final_regret(curve, "oracle-ts");
    for (const auto& label : curve.agent_labels) {
        const double se = std::hypot(final_stderr(curve, label), final_stderr(curve, "oracle-ts"));
        EXPECT_GE(final_regret(curve, label), oracle - 2.0 * se) << label;
    }
}
