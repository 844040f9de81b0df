#include "adats/hierarchy.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace adats;

namespace {

EnvironmentSpec basis_linear(std::size_t k, double sq, double s0, double noise) {
    std::vector<Vector> features;
    for (std::size_t i = 0; i < k; ++i) features.push_back(Vector::Unit(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)));
    return linear_bandit(std::move(features), sq, s0, noise);
}

}  // namespace

TEST(SampleMetaParameter, PointMassReturnsPriorMean) {
    auto spec = gaussian_bandit(3, 0.0, 0.1, 1.0);
    spec.mu_q = Vector{{0.2, -1.0, 3.0}};
    RngStream rng(1, 0);
    EXPECT_LT((sample_meta_parameter(spec, rng).mu - spec.mu_q).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(SampleMetaParameter, PriorVariance) {
    const auto spec = gaussian_bandit(2, 0.5, 0.1, 1.0);
    RngStream rng(2, 0);
    const int n = 100000;
    Vector sum = Vector::Zero(2);
    Vector sq = Vector::Zero(2);
    for (int i = 0; i < n; ++i) {
        const Vector mu = sample_meta_parameter(spec, rng).mu;
        sum += mu;
        sq += mu.cwiseProduct(mu);
    }
    const Vector var = sq / n - (sum / n).cwiseProduct(sum / n);
    EXPECT_NEAR(var(0), 0.25, 0.0125);
    EXPECT_NEAR(var(1), 0.25, 0.0125);
}

TEST(SampleMetaParameter, DegenerateCategorical) {
    auto spec = alternating_beta_mixture(3, 3);
    spec.mixture_weights = Vector{{1.0, 0.0, 0.0}};
    RngStream rng(3, 0);
    for (int i = 0; i < 1000; ++i) ASSERT_EQ(sample_meta_parameter(spec, rng).component, 0U);
}

TEST(SampleTask, ZeroTaskVarianceCopiesMetaParameter) {
    const auto spec = gaussian_bandit(3, 1.0, 0.0, 1.0);
    RngStream rng(4, 0);
    const MetaParameter mp{Vector{{0.1, 0.9, 0.4}}, 0};
    const auto task = sample_task(spec, mp, rng);
    EXPECT_LT((task.theta - mp.mu).cwiseAbs().maxCoeff(), 1e-3);
    EXPECT_EQ(task.optimal_action, Action::single(1));
}

TEST(SampleTask, SemiBanditTopL) {
    const auto spec = semi_bandit(4, 2, 1.0, 0.1, 1.0);
    const auto task = make_task(spec, Vector{{1.0, 3.0, 2.0, 0.0}});
    EXPECT_EQ(task.optimal_action.arms, (std::vector<std::size_t>{1, 2}));
    EXPECT_DOUBLE_EQ(task.optimal_value, 5.0);
}

TEST(SampleTask, LinearArgmax) {
    const auto spec = linear_bandit({Vector{{1.0, 0.0}}, Vector{{0.0, 1.0}}, Vector{{0.5, 0.5}}}, 1.0, 0.1, 1.0);
    const auto task = make_task(spec, Vector{{2.0, 1.0}});
    EXPECT_EQ(task.optimal_action, Action::single(0));
    EXPECT_DOUBLE_EQ(task.optimal_value, 2.0);
}

TEST(SampleTask, TiesGoToLowestIndex) {
    const auto spec = gaussian_bandit(3, 1.0, 0.1, 1.0);
    EXPECT_EQ(make_task(spec, Vector{{0.5, 0.7, 0.7}}).optimal_action, Action::single(1));
    const auto sb = semi_bandit(4, 2, 1.0, 0.1, 1.0);
    EXPECT_EQ(make_task(sb, Vector{{1.0, 1.0, 1.0, 1.0}}).optimal_action.arms, (std::vector<std::size_t>{0, 1}));
}

TEST(SampleTask, MixtureThetaIsClamped) {
    const auto spec = alternating_beta_mixture(3, 2, 1000.0, 1e-3);
    RngStream rng(5, 0);
    for (int i = 0; i < 200; ++i) {
        const auto task = sample_task(spec, MetaParameter{{}, static_cast<std::size_t>(i % 2)}, rng);
        ASSERT_GE(task.theta.minCoeff(), kBernoulliClamp);
        ASSERT_LE(task.theta.maxCoeff(), 1.0 - kBernoulliClamp);
    }
}

TEST(RealizeReward, NoiselessLimit) {
    const auto spec = gaussian_bandit(2, 1.0, 0.1, 1e-9);
    RngStream rng(6, 0);
    const auto task = make_task(spec, Vector{{0.3, 0.7}});
    const auto obs = realize_reward(spec, task, Action::single(1), rng);
    ASSERT_EQ(obs.rewards.size(), 1U);
    EXPECT_NEAR(obs.rewards[0], 0.7, 1e-6);
}

TEST(RealizeReward, SemiBanditFeedbackPerArm) {
    const auto spec = semi_bandit(4, 2, 1.0, 0.1, 1.0);
    RngStream rng(7, 0);
    const auto task = make_task(spec, Vector{{1.0, 3.0, 2.0, 0.0}});
    const auto obs = realize_reward(spec, task, Action{{0, 2}}, rng);
    EXPECT_EQ(obs.arms, (std::vector<std::size_t>{0, 2}));
    EXPECT_EQ(obs.rewards.size(), 2U);
}

TEST(RealizeReward, SampleMeanConcentrates) {
    const auto spec = gaussian_bandit(2, 1.0, 0.1, 1.0);
    RngStream rng(8, 0);
    const auto task = make_task(spec, Vector{{1.0, 0.0}});
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += realize_reward(spec, task, Action::single(0), rng).rewards[0];
    EXPECT_NEAR(sum / n, 1.0, 0.013);
}

TEST(RealizeReward, RejectsInvalidActions) {
    const auto spec = semi_bandit(4, 2, 1.0, 0.1, 1.0);
    RngStream rng(9, 0);
    const auto task = make_task(spec, Vector::Zero(4));
    EXPECT_THROW(realize_reward(spec, task, Action{{0}}, rng), InvalidAction);
    EXPECT_THROW(realize_reward(spec, task, Action{{2, 1}}, rng), InvalidAction);
    EXPECT_THROW(realize_reward(spec, task, Action{{0, 4}}, rng), InvalidAction);
    const auto g = gaussian_bandit(2, 1.0, 0.1, 1.0);
    EXPECT_THROW(instant_regret(g, make_task(g, Vector::Zero(2)), Action::single(2)), InvalidAction);
}

TEST(InstantRegret, Examples) {
    const auto g = gaussian_bandit(2, 1.0, 0.1, 1.0);
    const auto gt = make_task(g, Vector{{1.0, 0.0}});
    EXPECT_DOUBLE_EQ(instant_regret(g, gt, gt.optimal_action), 0.0);
    EXPECT_DOUBLE_EQ(instant_regret(g, gt, Action::single(1)), 1.0);
    const auto sb = semi_bandit(4, 2, 1.0, 0.1, 1.0);
    EXPECT_DOUBLE_EQ(instant_regret(sb, make_task(sb, Vector{{1.0, 3.0, 2.0, 0.0}}), Action{{0, 3}}), 4.0);
}

TEST(EnvironmentSpec, ValidationCatchesBadSpecs) {
    auto g = gaussian_bandit(2, 1.0, 0.1, 1.0);
    g.noise_sigma = 0.0;
    EXPECT_THROW(g.validate(), InvalidSpec);
    auto l = linear_bandit({Vector{{1.0, 1.0}}}, 1.0, 0.1, 1.0);
    EXPECT_THROW(l.validate(), InvalidSpec);
    auto m = alternating_beta_mixture(3, 2);
    m.mixture_weights = Vector{{0.7, 0.7}};
    EXPECT_THROW(m.validate(), InvalidSpec);
    auto s = semi_bandit(3, 4, 1.0, 0.1, 1.0);
    EXPECT_THROW(s.validate(), InvalidSpec);
}

TEST(MaterializeActions, UniformBoxWithUnitNorm) {
    auto spec = linear_bandit(8, 40, 1.0, 0.1, 1.0);
    RngStream rng(10, 0);
    const auto out = materialize_actions(spec, rng);
    ASSERT_EQ(out.actions.features.size(), 40U);
    for (const auto& a : out.actions.features) {
        EXPECT_LE(a.norm(), 1.0);
        EXPECT_LE(a.cwiseAbs().maxCoeff(), 0.5);
    }
    EXPECT_NO_THROW(out.validate());
}

TEST(AlternatingMixture, DisjointComponents) {
    const auto spec = alternating_beta_mixture(3, 2);
    ASSERT_EQ(spec.mixture_components.size(), 2U);
    for (std::size_t k = 0; k < 3; ++k) {
        const auto& a = spec.mixture_components[0].arms[k];
        const auto& b = spec.mixture_components[1].arms[k];
        EXPECT_EQ(a.alpha, b.beta);
        EXPECT_EQ(a.beta, b.alpha);
    }
}

// ---- properties ---------------------------------------------------------

TEST(HierarchyProperty, RegretIsNonNegative) {
    RngStream rng(11, 0);
    const auto g = gaussian_bandit(5, 1.0, 0.5, 1.0);
    const auto sb = semi_bandit(6, 3, 1.0, 0.5, 1.0);
    const auto lin = materialize_actions(linear_bandit(3, 15, 1.0, 0.5, 1.0), rng);
    for (int trial = 0; trial < 500; ++trial) {
        for (const auto* spec : {&g, &sb, &lin}) {
            const auto task = sample_task(*spec, sample_meta_parameter(*spec, rng), rng);
            const auto probe = best_action(*spec, standard_normal(static_cast<Eigen::Index>(spec->dim()), rng));
            ASSERT_GE(instant_regret(*spec, task, probe), 0.0);
            ASSERT_EQ(instant_regret(*spec, task, task.optimal_action), 0.0);
        }
    }
}

TEST(HierarchyProperty, BasisEmbeddingAgrees) {
    const auto g = gaussian_bandit(4, 1.0, 0.3, 1.0);
    const auto l = basis_linear(4, 1.0, 0.3, 1.0);
    RngStream rg(12, 0);
    RngStream rl(12, 0);
    for (int trial = 0; trial < 500; ++trial) {
        const auto mg = sample_meta_parameter(g, rg);
        const auto ml = sample_meta_parameter(l, rl);
        ASSERT_EQ(mg.mu, ml.mu);
        const auto tg = sample_task(g, mg, rg);
        const auto tl = sample_task(l, ml, rl);
        ASSERT_EQ(tg.theta, tl.theta);
        ASSERT_EQ(tg.optimal_action, tl.optimal_action);
        ASSERT_EQ(tg.optimal_value, tl.optimal_value);
        for (std::size_t a = 0; a < 4; ++a)
            ASSERT_EQ(instant_regret(g, tg, Action::single(a)), instant_regret(l, tl, Action::single(a)));
    }
}

TEST(HierarchyProperty, MarginalTaskVariance) {
    const auto spec = gaussian_bandit(2, 0.5, 0.1, 1.0);
    RngStream rng(13, 0);
    const int n = 100000;
    Vector sum = Vector::Zero(2);
    Vector sq = Vector::Zero(2);
    for (int i = 0; i < n; ++i) {
        const Vector th = sample_task(spec, sample_meta_parameter(spec, rng), rng).theta;
        sum += th;
        sq += th.cwiseProduct(th);
    }
    const Vector var = sq / n - (sum / n).cwiseProduct(sum / n);
    for (Eigen::Index k = 0; k < 2; ++k) EXPECT_NEAR(var(k), 0.26, 0.05 * 0.26);
}
