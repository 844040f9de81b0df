#pragma once

#include "adats/gauss_core.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace adats {

enum class Family { GaussianArms, LinearGaussian, SemiBandit, BernoulliMixture };

inline std::string to_string(Family f) {
    switch (f) {
        case Family::GaussianArms: return "gaussian";
        case Family::LinearGaussian: return "linear";
        case Family::SemiBandit: return "semibandit";
        case Family::BernoulliMixture: return "bernoulli-mixture";
    }
    return "unknown";
}

class InvalidAction : public std::invalid_argument {
public:
    explicit InvalidAction(const std::string& what) : std::invalid_argument(what) {}
};

class InvalidSpec : public std::invalid_argument {
public:
    explicit InvalidSpec(const std::string& what) : std::invalid_argument(what) {}
};

/// An arm index (single-pull families), an index into the feature list
/// (linear), or a sorted subset of arms (semi-bandit).
struct Action {
    std::vector<std::size_t> arms;

    static Action single(std::size_t i) { return Action{{i}}; }
    [[nodiscard]] std::size_t index() const { return arms.front(); }
    friend bool operator==(const Action&, const Action&) = default;
};

/// Rewards keyed by arm id; one entry for single-pull families.
struct Observation {
    std::vector<std::size_t> arms;
    std::vector<double> rewards;
};

struct BetaPrior {
    double alpha = 1.0;
    double beta = 1.0;
};

/// One candidate task prior of the mixture model: a Beta per arm.
struct MixtureComponent {
    std::vector<BetaPrior> arms;
};

struct ActionSet {
    std::size_t arms = 0;   // K
    std::size_t budget = 1; // L, subset size for semi-bandits
    std::vector<Vector> features;
    bool resample_per_run = false;  // draw `arms` features from U[-0.5, 0.5]^d once per run
};

inline constexpr double kBernoulliClamp = 1e-6;

struct EnvironmentSpec {
    Family family = Family::GaussianArms;
    Vector mu_q;
    PsdMatrix sigma_q;
    PsdMatrix sigma_0;
    double noise_sigma = 1.0;
    ActionSet actions;
    std::vector<MixtureComponent> mixture_components;
    Vector mixture_weights;

    /// Dimension of θ: K for arm-indexed families, d for linear.
    [[nodiscard]] std::size_t dim() const {
        if (family == Family::BernoulliMixture) return actions.arms;
        return static_cast<std::size_t>(mu_q.size());
    }

    [[nodiscard]] std::size_t action_count() const {
        return actions.arms;
    }

    [[nodiscard]] bool is_gaussian() const { return family != Family::BernoulliMixture; }

    void validate() const {
        if (actions.arms == 0) throw InvalidSpec("action set is empty");
        if (family == Family::BernoulliMixture) {
            if (mixture_components.empty()) throw InvalidSpec("mixture has no components");
            if (static_cast<std::size_t>(mixture_weights.size()) != mixture_components.size())
                throw InvalidSpec("mixture weights and components disagree in length");
            if ((mixture_weights.array() < 0.0).any() ||
                std::abs(mixture_weights.sum() - 1.0) > 1e-12)
                throw InvalidSpec("mixture weights must be a probability vector");
            for (const auto& c : mixture_components) {
                if (c.arms.size() != actions.arms) throw InvalidSpec("component arm count differs from K");
                for (const auto& b : c.arms)
                    if (!(b.alpha > 0.0 && b.beta > 0.0)) throw InvalidSpec("Beta parameters must be positive");
            }
            return;
        }
        const auto d = mu_q.size();
        if (d == 0 || sigma_q.dim() != d || sigma_0.dim() != d)
            throw InvalidSpec("mu_q, sigma_q and sigma_0 dimensions disagree");
        if (!(noise_sigma > 0.0)) throw InvalidSpec("noise_sigma must be positive");
        if (family == Family::GaussianArms || family == Family::SemiBandit) {
            if (static_cast<std::size_t>(d) != actions.arms) throw InvalidSpec("arm count differs from dimension");
            if (!sigma_0.is_diagonal()) throw InvalidSpec("sigma_0 must be diagonal for arm-indexed families");
        }
        if (family == Family::SemiBandit && (actions.budget < 1 || actions.budget > actions.arms))
            throw InvalidSpec("budget L must satisfy 1 <= L <= K");
        if (family == Family::LinearGaussian && !actions.resample_per_run) {
            if (actions.features.size() != actions.arms) throw InvalidSpec("feature count differs from K");
            for (const auto& a : actions.features) {
                if (a.size() != d) throw InvalidSpec("feature dimension differs from d");
                if (a.norm() > 1.0 + 1e-12) throw InvalidSpec("feature vectors must satisfy |a| <= 1");
            }
        }
    }
};

struct MetaParameter {
    Vector mu;                  // Gaussian families
    std::size_t component = 0;  // mixture family
};

struct TaskInstance {
    Vector theta;
    Action optimal_action;
    double optimal_value = 0.0;
};

// ---- spec constructors --------------------------------------------------

inline EnvironmentSpec gaussian_bandit(std::size_t arms, double sigma_q, double sigma_0, double noise) {
    const auto k = static_cast<Eigen::Index>(arms);
    EnvironmentSpec s;
    s.family = Family::GaussianArms;
    s.mu_q = Vector::Zero(k);
    s.sigma_q = PsdMatrix::scaled_identity(k, sigma_q * sigma_q);
    s.sigma_0 = PsdMatrix::scaled_identity(k, sigma_0 * sigma_0);
    s.noise_sigma = noise;
    s.actions.arms = arms;
    return s;
}

/// Linear bandit whose `arms` feature vectors are drawn per run.
inline EnvironmentSpec linear_bandit(std::size_t dim, std::size_t arms, double sigma_q, double sigma_0,
                                     double noise) {
    const auto d = static_cast<Eigen::Index>(dim);
    EnvironmentSpec s;
    s.family = Family::LinearGaussian;
    s.mu_q = Vector::Zero(d);
    s.sigma_q = PsdMatrix::scaled_identity(d, sigma_q * sigma_q);
    s.sigma_0 = PsdMatrix::scaled_identity(d, sigma_0 * sigma_0);
    s.noise_sigma = noise;
    s.actions.arms = arms;
    s.actions.resample_per_run = true;
    return s;
}

inline EnvironmentSpec linear_bandit(std::vector<Vector> features, double sigma_q, double sigma_0, double noise) {
    if (features.empty()) throw InvalidSpec("empty feature list");
    auto s = linear_bandit(static_cast<std::size_t>(features.front().size()), features.size(), sigma_q, sigma_0,
                           noise);
    s.actions.features = std::move(features);
    s.actions.resample_per_run = false;
    return s;
}

/// Semi-bandit with per-arm widths (σ_{q,k}, σ_{0,k}), not variances.
inline EnvironmentSpec semi_bandit(std::size_t budget, const Vector& sigma_q, const Vector& sigma_0, double noise) {
    EnvironmentSpec s;
    s.family = Family::SemiBandit;
    s.mu_q = Vector::Zero(sigma_q.size());
    s.sigma_q = PsdMatrix::diagonal(sigma_q.array().square().matrix());
    s.sigma_0 = PsdMatrix::diagonal(sigma_0.array().square().matrix());
    s.noise_sigma = noise;
    s.actions.arms = static_cast<std::size_t>(sigma_q.size());
    s.actions.budget = budget;
    return s;
}

inline EnvironmentSpec semi_bandit(std::size_t arms, std::size_t budget, double sigma_q, double sigma_0, double noise) {
    const auto k = static_cast<Eigen::Index>(arms);
    return semi_bandit(budget, Vector::Constant(k, sigma_q), Vector::Constant(k, sigma_0), noise);
}

inline EnvironmentSpec bernoulli_mixture(std::vector<MixtureComponent> components, Vector weights) {
    EnvironmentSpec s;
    s.family = Family::BernoulliMixture;
    s.actions.arms = components.empty() ? 0 : components.front().arms.size();
    s.mixture_components = std::move(components);
    s.mixture_weights = std::move(weights);
    return s;
}

/// L components over K arms; component j gives arm k Beta(hi, lo) when
/// (k + j) % L == 0 and Beta(lo, hi) otherwise. Uniform weights.
inline EnvironmentSpec alternating_beta_mixture(std::size_t arms, std::size_t components, double hi = 9.0,
                                                double lo = 1.0) {
    std::vector<MixtureComponent> comps(components);
    for (std::size_t j = 0; j < components; ++j)
        for (std::size_t k = 0; k < arms; ++k)
            comps[j].arms.push_back((k + j) % components == 0 ? BetaPrior{hi, lo} : BetaPrior{lo, hi});
    return bernoulli_mixture(std::move(comps),
                             Vector::Constant(static_cast<Eigen::Index>(components), 1.0 / components));
}

// ---- sampling -----------------------------------------------------------

/// Fills in a per-run action set when the environment asks for one.
inline EnvironmentSpec materialize_actions(const EnvironmentSpec& spec, RngStream& rng) {
    if (spec.family != Family::LinearGaussian || !spec.actions.resample_per_run) return spec;
    EnvironmentSpec out = spec;
    out.actions.features.clear();
    const auto d = spec.mu_q.size();
    while (out.actions.features.size() < spec.actions.arms) {
        Vector a(d);
        for (Eigen::Index i = 0; i < d; ++i) a(i) = rng.uniform() - 0.5;
        if (a.norm() <= 1.0) out.actions.features.push_back(std::move(a));
    }
    out.actions.resample_per_run = false;
    return out;
}

inline MetaParameter sample_meta_parameter(const EnvironmentSpec& spec, RngStream& rng) {
    MetaParameter mp;
    if (spec.family == Family::BernoulliMixture) {
        const double u = rng.uniform();
        double acc = 0.0;
        const auto L = spec.mixture_components.size();
        mp.component = L - 1;
        for (std::size_t j = 0; j < L; ++j) {
            acc += spec.mixture_weights(static_cast<Eigen::Index>(j));
            if (u < acc) {
                mp.component = j;
                break;
            }
        }
        // zero-weight tail components are never chosen even at u ~ 1
        while (mp.component > 0 && spec.mixture_weights(static_cast<Eigen::Index>(mp.component)) == 0.0)
            --mp.component;
        return mp;
    }
    mp.mu = mvn_sample(spec.mu_q, spec.sigma_q, rng);
    return mp;
}

/// Indices of the L largest values, ties to the lowest index, returned sorted.
inline std::vector<std::size_t> top_l(const Vector& values, std::size_t budget) {
    std::vector<std::size_t> idx(static_cast<std::size_t>(values.size()));
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return values(static_cast<Eigen::Index>(a)) > values(static_cast<Eigen::Index>(b));
    });
    idx.resize(budget);
    std::sort(idx.begin(), idx.end());
    return idx;
}

inline std::size_t argmax_index(const Vector& values) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < values.size(); ++i)
        if (values(i) > values(best)) best = i;
    return static_cast<std::size_t>(best);
}

inline void check_action(const EnvironmentSpec& spec, const Action& action) {
    const auto K = spec.actions.arms;
    if (action.arms.empty()) throw InvalidAction("empty action");
    if (spec.family == Family::SemiBandit) {
        if (action.arms.size() != spec.actions.budget)
            throw InvalidAction("semi-bandit action must contain exactly L arms");
        for (std::size_t i = 0; i < action.arms.size(); ++i) {
            if (action.arms[i] >= K) throw InvalidAction("arm index out of range");
            if (i > 0 && action.arms[i] <= action.arms[i - 1])
                throw InvalidAction("semi-bandit action must be sorted and duplicate-free");
        }
        return;
    }
    if (action.arms.size() != 1) throw InvalidAction("single-pull family expects one arm");
    const auto limit = spec.family == Family::LinearGaussian ? spec.actions.features.size() : K;
    if (action.index() >= limit) throw InvalidAction("action index out of range");
}

/// True mean reward r(action; θ).
inline double mean_reward(const EnvironmentSpec& spec, const Vector& theta, const Action& action) {
    check_action(spec, action);
    switch (spec.family) {
        case Family::LinearGaussian: return spec.actions.features[action.index()].dot(theta);
        case Family::SemiBandit: {
            double v = 0.0;
            for (auto k : action.arms) v += theta(static_cast<Eigen::Index>(k));
            return v;
        }
        default: return theta(static_cast<Eigen::Index>(action.index()));
    }
}

/// argmax over the action set of r(·; θ), lowest index on ties.
inline Action best_action(const EnvironmentSpec& spec, const Vector& theta) {
    switch (spec.family) {
        case Family::LinearGaussian: {
            const auto& f = spec.actions.features;
            Vector values(static_cast<Eigen::Index>(f.size()));
            for (std::size_t i = 0; i < f.size(); ++i) values(static_cast<Eigen::Index>(i)) = f[i].dot(theta);
            return Action::single(argmax_index(values));
        }
        case Family::SemiBandit: return Action{top_l(theta, spec.actions.budget)};
        default: return Action::single(argmax_index(theta));
    }
}

inline TaskInstance make_task(const EnvironmentSpec& spec, Vector theta) {
    TaskInstance task;
    task.optimal_action = best_action(spec, theta);
    task.optimal_value = mean_reward(spec, theta, task.optimal_action);
    task.theta = std::move(theta);
    return task;
}

inline TaskInstance sample_task(const EnvironmentSpec& spec, const MetaParameter& meta, RngStream& rng) {
    if (spec.family == Family::BernoulliMixture) {
        const auto& comp = spec.mixture_components.at(meta.component);
        Vector theta(static_cast<Eigen::Index>(comp.arms.size()));
        for (std::size_t k = 0; k < comp.arms.size(); ++k)
            theta(static_cast<Eigen::Index>(k)) =
                std::clamp(rng.beta(comp.arms[k].alpha, comp.arms[k].beta), kBernoulliClamp, 1.0 - kBernoulliClamp);
        return make_task(spec, std::move(theta));
    }
    if (meta.mu.size() != spec.mu_q.size()) throw std::invalid_argument("sample_task: mu_star dimension mismatch");
    return make_task(spec, mvn_sample(meta.mu, spec.sigma_0, rng));
}

inline Observation realize_reward(const EnvironmentSpec& spec, const TaskInstance& task, const Action& action,
                                  RngStream& rng) {
    check_action(spec, action);
    Observation obs;
    switch (spec.family) {
        case Family::SemiBandit:
            for (auto k : action.arms) {
                obs.arms.push_back(k);
                obs.rewards.push_back(task.theta(static_cast<Eigen::Index>(k)) + spec.noise_sigma * rng.normal());
            }
            break;
        case Family::BernoulliMixture:
            obs.arms = action.arms;
            obs.rewards.push_back(rng.uniform() < task.theta(static_cast<Eigen::Index>(action.index())) ? 1.0 : 0.0);
            break;
        default:
            obs.arms = action.arms;
            obs.rewards.push_back(mean_reward(spec, task.theta, action) + spec.noise_sigma * rng.normal());
            break;
    }
    return obs;
}

inline double instant_regret(const EnvironmentSpec& spec, const TaskInstance& task, const Action& action) {
    return std::max(0.0, task.optimal_value - mean_reward(spec, task.theta, action));
}

}  // namespace adats
