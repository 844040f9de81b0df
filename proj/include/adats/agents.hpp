#pragma once

#include "adats/gauss_core.hpp"
#include "adats/hierarchy.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace adats {

// ---- agent identity -----------------------------------------------------

enum class AgentKind { AgnosticTS, OracleTS, MetaTS, AdaTS, AdaTSForced, MisassignedTS };

/// Which policy to run plus the width multiplier applied to its belief
/// about Σ_q (3 = AdaTS+, 1/3 = AdaTS-).
struct AgentSpec {
    AgentKind kind = AgentKind::AdaTS;
    double misspecification_scale = 1.0;

    friend bool operator==(const AgentSpec&, const AgentSpec&) = default;
};

class UnknownAgent : public std::invalid_argument {
public:
    explicit UnknownAgent(const std::string& what) : std::invalid_argument(what) {}
};

inline std::string agent_label(const AgentSpec& a) {
    std::string base;
    switch (a.kind) {
        case AgentKind::AgnosticTS: base = "ts"; break;
        case AgentKind::OracleTS: base = "oracle-ts"; break;
        case AgentKind::MetaTS: base = "meta-ts"; break;
        case AgentKind::AdaTS: base = "ada-ts"; break;
        case AgentKind::AdaTSForced: base = "ada-ts-forced"; break;
        case AgentKind::MisassignedTS: base = "misassigned-ts"; break;
    }
    if (a.misspecification_scale == 1.0) return base;
    if (a.kind == AgentKind::AdaTS && a.misspecification_scale == 3.0) return "ada-ts+";
    if (a.kind == AgentKind::AdaTS && a.misspecification_scale == 1.0 / 3.0) return "ada-ts-";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, a.misspecification_scale);
    return base + "@" + std::string(buf, end);
}

/// Inverse of agent_label. Accepts `name@scale` for arbitrary widths.
inline AgentSpec parse_agent(const std::string& label) {
    if (label == "ada-ts+") return {AgentKind::AdaTS, 3.0};
    if (label == "ada-ts-") return {AgentKind::AdaTS, 1.0 / 3.0};
    std::string name = label;
    double scale = 1.0;
    if (auto at = label.find('@'); at != std::string::npos) {
        name = label.substr(0, at);
        const auto text = label.substr(at + 1);
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), scale);
        if (ec != std::errc{} || ptr != text.data() + text.size() || !(scale > 0.0))
            throw UnknownAgent("bad misspecification scale in agent '" + label + "'");
    }
    static const std::pair<const char*, AgentKind> names[] = {
        {"ts", AgentKind::AgnosticTS},       {"oracle-ts", AgentKind::OracleTS},
        {"meta-ts", AgentKind::MetaTS},      {"ada-ts", AgentKind::AdaTS},
        {"ada-ts-forced", AgentKind::AdaTSForced}, {"misassigned-ts", AgentKind::MisassignedTS},
    };
    for (const auto& [n, k] : names)
        if (name == n) return {k, scale};
    throw UnknownAgent("unknown agent '" + label + "'");
}

/// Σ_q → scale²·Σ_q.
inline EnvironmentSpec scale_meta_prior(const EnvironmentSpec& spec, double scale) {
    if (!(scale > 0.0)) throw std::invalid_argument("scale_meta_prior: scale must be positive");
    if (scale == 1.0 || !spec.is_gaussian()) return spec;
    EnvironmentSpec out = spec;
    out.sigma_q = (scale * scale) * spec.sigma_q;
    return out;
}

// ---- Gaussian posteriors ------------------------------------------------

/// Belief N(mean, cov) over μ*. Arm-indexed families keep cov diagonal.
struct GaussianMetaPosterior {
    Vector mean;
    PsdMatrix cov;

    static GaussianMetaPosterior from_prior(const EnvironmentSpec& spec) { return {spec.mu_q, spec.sigma_q}; }
    [[nodiscard]] Vector variances() const { return cov.diag(); }
};

/// Belief N(mean, cov) over θ within the current task.
struct TaskPosterior {
    Vector mean;
    PsdMatrix cov;
};

/// Per-arm pull counts T_i and reward sums B_i of one task. Semi-bandit
/// rounds count every arm of the pulled subset.
struct ArmTaskSummary {
    std::vector<std::size_t> pulls;
    Vector reward_sums;

    explicit ArmTaskSummary(std::size_t arms = 0)
        : pulls(arms, 0), reward_sums(Vector::Zero(static_cast<Eigen::Index>(arms))) {}

    void record(const Observation& obs) {
        for (std::size_t j = 0; j < obs.arms.size(); ++j) {
            ++pulls.at(obs.arms[j]);
            reward_sums(static_cast<Eigen::Index>(obs.arms[j])) += obs.rewards[j];
        }
    }
};

/// G = Σ a aᵀ and B = Σ a y of one linear-bandit task.
struct LinearTaskSummary {
    Matrix gram;
    Vector weighted_sum;

    explicit LinearTaskSummary(Eigen::Index dim = 0) : gram(Matrix::Zero(dim, dim)), weighted_sum(Vector::Zero(dim)) {}

    void record(const Vector& feature, double reward) {
        gram.noalias() += feature * feature.transpose();
        weighted_sum += feature * reward;
    }
};

/// P_s = N(μ̂_s, Σ̂_s + Σ_0).
inline TaskPosterior uncertainty_adjusted_prior(const GaussianMetaPosterior& meta, const PsdMatrix& sigma_0) {
    return {meta.mean, meta.cov + sigma_0};
}

/// Feature vectors x with E[y] = xᵀθ for each reward in an observation.
inline std::vector<Vector> observation_features(const EnvironmentSpec& spec, const Observation& obs) {
    std::vector<Vector> out;
    out.reserve(obs.arms.size());
    const auto d = static_cast<Eigen::Index>(spec.dim());
    for (auto k : obs.arms) {
        if (spec.family == Family::LinearGaussian) {
            out.push_back(spec.actions.features.at(k));
        } else {
            out.push_back(Vector::Unit(d, static_cast<Eigen::Index>(k)));
        }
    }
    return out;
}

/// Conditions on y_j ~ N(x_jᵀθ, σ²), one rank-one step per reward. The
/// result equals the batch update
///   Σ' = (Σ⁻¹ + Σ x xᵀ/σ²)⁻¹,  μ' = Σ'(Σ⁻¹μ + Σ x y/σ²)
/// but stays defined when Σ is singular.
inline TaskPosterior update_task_posterior(const TaskPosterior& prior, const std::vector<Vector>& features,
                                           const std::vector<double>& rewards, double noise_sigma) {
    if (features.size() != rewards.size()) throw std::invalid_argument("update_task_posterior: size mismatch");
    const double noise_var = noise_sigma * noise_sigma;
    Vector mean = prior.mean;
    Matrix cov = prior.cov.matrix();
    for (std::size_t j = 0; j < features.size(); ++j) {
        const Vector& x = features[j];
        const Vector gain = cov * x;
        const double innovation_var = x.dot(gain) + noise_var;
        mean += gain * ((rewards[j] - x.dot(mean)) / innovation_var);
        cov.noalias() -= gain * gain.transpose() / innovation_var;
        if (!mean.allFinite() || !cov.allFinite()) throw NotPsd("update_task_posterior: non-finite state");
    }
    return {std::move(mean), PsdMatrix(cov)};
}

inline TaskPosterior update_task_posterior(const EnvironmentSpec& spec, const TaskPosterior& prior,
                                           const Observation& obs) {
    return update_task_posterior(prior, observation_features(spec, obs), obs.rewards, spec.noise_sigma);
}

/// Sample θ̃ from the posterior and act greedily on it.
inline Action ts_select(const TaskPosterior& posterior, const EnvironmentSpec& spec, RngStream& rng) {
    return best_action(spec, mvn_sample(posterior.mean, posterior.cov, rng));
}

/// Diagonal meta-posterior update for arm-indexed families. Each pulled arm
/// contributes precision T/(Tσ0² + σ²) and the matching share of B/T; the
/// covariance form keeps zero-variance (point-mass) arms fixed.
inline GaussianMetaPosterior end_task_gaussian(const GaussianMetaPosterior& meta, const ArmTaskSummary& summary,
                                               const EnvironmentSpec& spec) {
    GaussianMetaPosterior out = meta;
    Vector var = meta.cov.diag();
    const double noise_var = spec.noise_sigma * spec.noise_sigma;
    for (std::size_t i = 0; i < summary.pulls.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        const auto t = static_cast<double>(summary.pulls[i]);
        if (t == 0.0) continue;
        const double denom = t * spec.sigma_0(k, k) + noise_var;
        const double precision_gain = t / denom;
        const double info = summary.reward_sums(k) / denom;
        const double v = var(k) / (1.0 + precision_gain * var(k));
        out.mean(k) = meta.mean(k) + v * (info - precision_gain * meta.mean(k));
        var(k) = v;
    }
    out.cov = PsdMatrix::diagonal(var);
    return out;
}

/// Semi-bandit summaries count subset membership, so the per-arm recursion
/// is the K-armed one. Arms with σ0² = 0 gain precision N/σ².
inline GaussianMetaPosterior end_task_semibandit(const GaussianMetaPosterior& meta, const ArmTaskSummary& summary,
                                                 const EnvironmentSpec& spec) {
    return end_task_gaussian(meta, summary, spec);
}

/// Full-covariance meta-posterior update for the linear bandit.
///
/// With M = G/σ² and b = B/σ², the task contributes precision
///   J = M − M(Σ0⁻¹ + M)⁻¹M = (I + MΣ0)⁻¹ M
/// and information h = (I + MΣ0)⁻¹ b. Applied in covariance form,
///   Σ' = (I + ΣJ)⁻¹ Σ,   μ' = μ + Σ'(h − Jμ),
/// which needs neither Σ0 nor Σ to be invertible.
inline GaussianMetaPosterior end_task_linear(const GaussianMetaPosterior& meta, const LinearTaskSummary& summary,
                                             const EnvironmentSpec& spec) {
    if (summary.gram.isZero(0.0)) return meta;
    const auto d = meta.mean.size();
    const double noise_var = spec.noise_sigma * spec.noise_sigma;
    const Matrix m = summary.gram / noise_var;
    const Vector b = summary.weighted_sum / noise_var;
    const Matrix id = Matrix::Identity(d, d);

    Eigen::PartialPivLU<Matrix> task_lu(id + m * spec.sigma_0.matrix());
    const Matrix j = PsdMatrix(task_lu.solve(m)).matrix();
    const Vector h = task_lu.solve(b);

    Eigen::PartialPivLU<Matrix> meta_lu(id + meta.cov.matrix() * j);
    PsdMatrix cov(meta_lu.solve(meta.cov.matrix()));
    Vector mean = meta.mean + cov.matrix() * (h - j * meta.mean);
    if (!mean.allFinite() || !cov.matrix().allFinite()) throw NotPsd("end_task_linear: non-finite meta-posterior");
    return {std::move(mean), std::move(cov)};
}

// ---- forced exploration -------------------------------------------------

/// Tasks {i² + 1 : i = 0..⌊√(m−1)⌋}, 1-based.
inline std::vector<std::size_t> exploration_tasks(std::size_t m) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i * i + 1 <= m; ++i) out.push_back(i * i + 1);
    return out;
}

inline bool is_exploration_task(std::size_t s, std::size_t m) {
    if (s < 1 || s > m) return false;
    const auto r = static_cast<std::size_t>(std::sqrt(static_cast<double>(s - 1)));
    for (auto i = r > 0 ? r - 1 : 0; i <= r + 1; ++i)
        if (i * i + 1 == s) return true;
    return false;
}

/// ⌈K/L⌉ size-L subsets whose union is every arm; the last one wraps around.
inline std::vector<Action> covering_subsets(std::size_t arms, std::size_t budget) {
    std::vector<Action> out;
    for (std::size_t start = 0; start < arms; start += budget) {
        Action a;
        for (std::size_t j = 0; j < budget; ++j) a.arms.push_back((start + j) % arms);
        std::sort(a.arms.begin(), a.arms.end());
        a.arms.erase(std::unique(a.arms.begin(), a.arms.end()), a.arms.end());
        out.push_back(std::move(a));
    }
    return out;
}

/// Spanning exploration actions of a linear action set and their
/// η = λ_d(Σ a aᵀ).
struct ExplorationSet {
    std::vector<std::size_t> indices;
    double eta = 0.0;
};

inline constexpr double kMinExplorationEta = 1e-6;

inline double gram_min_eigenvalue(const std::vector<Vector>& features, const std::vector<std::size_t>& indices,
                                  Eigen::Index dim) {
    Matrix g = Matrix::Zero(dim, dim);
    for (auto i : indices) g.noalias() += features[i] * features[i].transpose();
    return min_eigenvalue(PsdMatrix(g));
}

/// Greedy choice of d distinct actions. λ_d is zero for every candidate
/// until the running Gram matrix has full rank, so candidates are ranked by
/// log det(G + aaᵀ + 1e-9·I) instead, which is monotone in λ_d once full rank.
inline ExplorationSet choose_exploration_actions(const EnvironmentSpec& spec) {
    const auto& f = spec.actions.features;
    const auto d = static_cast<Eigen::Index>(spec.dim());
    ExplorationSet out;
    Matrix g = Matrix::Zero(d, d);
    std::vector<bool> used(f.size(), false);
    for (Eigen::Index step = 0; step < d && out.indices.size() < f.size(); ++step) {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t best_i = f.size();
        for (std::size_t i = 0; i < f.size(); ++i) {
            if (used[i]) continue;
            Matrix c = g + f[i] * f[i].transpose();
            c.diagonal().array() += 1e-9;
            Eigen::LLT<Matrix> llt(c);
            const double score = 2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
            if (score > best) {
                best = score;
                best_i = i;
            }
        }
        used[best_i] = true;
        out.indices.push_back(best_i);
        g.noalias() += f[best_i] * f[best_i].transpose();
    }
    out.eta = static_cast<Eigen::Index>(out.indices.size()) == d ? gram_min_eigenvalue(f, out.indices, d) : 0.0;
    return out;
}

/// Appends 0.5·e_i to a linear action set whose members cannot reach
/// λ_d ≥ 1e-6. No-op otherwise (and for other families).
inline EnvironmentSpec ensure_exploration_actions(const EnvironmentSpec& spec) {
    if (spec.family != Family::LinearGaussian) return spec;
    if (choose_exploration_actions(spec).eta >= kMinExplorationEta) return spec;
    EnvironmentSpec out = spec;
    const auto d = static_cast<Eigen::Index>(spec.dim());
    for (Eigen::Index i = 0; i < d; ++i) out.actions.features.push_back(0.5 * Vector::Unit(d, i));
    out.actions.arms = out.actions.features.size();
    return out;
}

/// Prescribed opening actions of task s (1-based) for AdaTS with forced
/// exploration; empty unless s ∈ {i² + 1}.
inline std::vector<Action> forced_exploration_plan(std::size_t s, std::size_t m, const EnvironmentSpec& spec,
                                                   const ExplorationSet& linear_set = {}) {
    if (!is_exploration_task(s, m)) return {};
    std::vector<Action> plan;
    switch (spec.family) {
        case Family::LinearGaussian:
            for (auto i : linear_set.indices) plan.push_back(Action::single(i));
            break;
        case Family::SemiBandit: plan = covering_subsets(spec.actions.arms, spec.actions.budget); break;
        default:
            for (std::size_t i = 0; i < spec.actions.arms; ++i) plan.push_back(Action::single(i));
            break;
    }
    return plan;
}

// ---- mixture (Beta-Bernoulli) -------------------------------------------

inline double log_beta_fn(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

inline double log_sum_exp(const Vector& v) {
    const double mx = v.maxCoeff();
    if (!std::isfinite(mx)) return mx;
    return mx + std::log((v.array() - mx).exp().sum());
}

inline Vector normalize_log_weights(const Vector& lw) { return lw.array() - log_sum_exp(lw); }

/// Categorical belief over which candidate prior generated the tasks.
struct MixtureMetaPosterior {
    Vector log_weights;
    std::vector<MixtureComponent> components;

    static MixtureMetaPosterior from_prior(const EnvironmentSpec& spec) {
        return {spec.mixture_weights.array().log().matrix(), spec.mixture_components};
    }
    [[nodiscard]] Vector weights() const { return normalize_log_weights(log_weights).array().exp(); }
};

/// Per-arm Bernoulli outcome counts of one task.
struct BernoulliCounts {
    std::vector<std::size_t> successes;
    std::vector<std::size_t> failures;

    explicit BernoulliCounts(std::size_t arms = 0) : successes(arms, 0), failures(arms, 0) {}

    void record(std::size_t arm, double outcome) { ++(outcome > 0.5 ? successes : failures).at(arm); }
};

/// log ∫ L(θ) P(θ; j) dθ for a product of Betas: Σ_k log B(α+s1, β+s0)/B(α, β).
inline double log_marginal_likelihood(const MixtureComponent& c, const BernoulliCounts& counts) {
    double out = 0.0;
    for (std::size_t k = 0; k < c.arms.size(); ++k) {
        const auto s1 = static_cast<double>(counts.successes[k]);
        const auto s0 = static_cast<double>(counts.failures[k]);
        if (s1 == 0.0 && s0 == 0.0) continue;
        out += log_beta_fn(c.arms[k].alpha + s1, c.arms[k].beta + s0) - log_beta_fn(c.arms[k].alpha, c.arms[k].beta);
    }
    return out;
}

inline MixtureMetaPosterior mixture_update(const MixtureMetaPosterior& meta, const BernoulliCounts& counts) {
    MixtureMetaPosterior out = meta;
    for (std::size_t j = 0; j < meta.components.size(); ++j)
        out.log_weights(static_cast<Eigen::Index>(j)) += log_marginal_likelihood(meta.components[j], counts);
    out.log_weights = normalize_log_weights(out.log_weights);
    return out;
}

/// Within-task posterior under a mixture prior: per-component Beta
/// posteriors and the component weights given the task's data so far.
struct MixtureTaskState {
    Vector log_weights;
    std::vector<MixtureComponent> posteriors;

    static MixtureTaskState from_prior(const Vector& log_weights, const std::vector<MixtureComponent>& components) {
        return {normalize_log_weights(log_weights), components};
    }

    /// One Bernoulli outcome of `arm`: reweight by each component's
    /// predictive probability, then take the conjugate step.
    void observe(std::size_t arm, double outcome) {
        const bool success = outcome > 0.5;
        for (std::size_t j = 0; j < posteriors.size(); ++j) {
            auto& b = posteriors[j].arms.at(arm);
            const double p = (success ? b.alpha : b.beta) / (b.alpha + b.beta);
            log_weights(static_cast<Eigen::Index>(j)) += std::log(p);
            (success ? b.alpha : b.beta) += 1.0;
        }
        log_weights = normalize_log_weights(log_weights);
    }
};

inline std::size_t sample_categorical_log(const Vector& log_weights, RngStream& rng) {
    const Vector w = normalize_log_weights(log_weights).array().exp();
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (Eigen::Index j = 0; j < w.size(); ++j) {
        if (w(j) <= 0.0) continue;
        last_positive = static_cast<std::size_t>(j);
        acc += w(j);
        if (u < acc) return static_cast<std::size_t>(j);
    }
    return last_positive;
}

/// Exact Thompson sampling under a mixture of Beta products.
inline std::size_t mixture_ts_select(const MixtureTaskState& state, RngStream& rng) {
    const auto j = sample_categorical_log(state.log_weights, rng);
    const auto& arms = state.posteriors[j].arms;
    Vector theta(static_cast<Eigen::Index>(arms.size()));
    for (std::size_t k = 0; k < arms.size(); ++k)
        theta(static_cast<Eigen::Index>(k)) = rng.beta(arms[k].alpha, arms[k].beta);
    return argmax_index(theta);
}

// ---- agents -------------------------------------------------------------

/// Ground truth an agent may peek at (OracleTS, MisassignedTS only).
struct TaskContext {
    const MetaParameter* truth = nullptr;
};

class Agent {
public:
    virtual ~Agent() = default;
    /// s is 1-based.
    virtual void begin_task(std::size_t s, const TaskContext& ctx, RngStream& rng) = 0;
    virtual Action select(RngStream& rng) = 0;
    virtual void observe(const Action& action, const Observation& obs) = 0;
    virtual void end_task() = 0;
};

/// TS, OracleTS, MetaTS, AdaTS and AdaTS with forced exploration for the
/// Gaussian, linear and semi-bandit families.
class GaussianAgent final : public Agent {
public:
    GaussianAgent(AgentSpec agent, EnvironmentSpec env, std::size_t tasks)
        : agent_(agent), env_(std::move(env)), believed_(scale_meta_prior(env_, agent.misspecification_scale)),
          tasks_(tasks), meta_(GaussianMetaPosterior::from_prior(believed_)) {
        if (!env_.is_gaussian()) throw std::invalid_argument("GaussianAgent: environment is not Gaussian");
        if (agent_.kind == AgentKind::MisassignedTS)
            throw UnknownAgent("misassigned-ts is only defined for the bernoulli-mixture family");
        if (agent_.kind == AgentKind::AdaTSForced && env_.family == Family::LinearGaussian)
            exploration_ = choose_exploration_actions(env_);
    }

    void begin_task(std::size_t s, const TaskContext& ctx, RngStream& rng) override {
        round_ = 0;
        plan_.clear();
        switch (agent_.kind) {
            case AgentKind::AgnosticTS:
                posterior_ = {believed_.mu_q, believed_.sigma_q + believed_.sigma_0};
                break;
            case AgentKind::OracleTS:
                if (ctx.truth == nullptr) throw std::invalid_argument("OracleTS needs the true meta-parameter");
                posterior_ = {ctx.truth->mu, believed_.sigma_0};
                break;
            case AgentKind::MetaTS:
                posterior_ = {mvn_sample(meta_.mean, meta_.cov, rng), believed_.sigma_0};
                break;
            case AgentKind::AdaTSForced:
                plan_ = forced_exploration_plan(s, tasks_, env_, exploration_);
                [[fallthrough]];
            case AgentKind::AdaTS:
                posterior_ = uncertainty_adjusted_prior(meta_, believed_.sigma_0);
                break;
            case AgentKind::MisassignedTS: break;
        }
        arm_summary_ = ArmTaskSummary(env_.actions.arms);
        linear_summary_ = LinearTaskSummary(static_cast<Eigen::Index>(env_.dim()));
    }

    Action select(RngStream& rng) override {
        if (round_ < plan_.size()) return plan_[round_];
        return ts_select(posterior_, env_, rng);
    }

    void observe(const Action&, const Observation& obs) override {
        const auto features = observation_features(env_, obs);
        posterior_ = update_task_posterior(posterior_, features, obs.rewards, env_.noise_sigma);
        if (env_.family == Family::LinearGaussian) {
            for (std::size_t j = 0; j < features.size(); ++j) linear_summary_.record(features[j], obs.rewards[j]);
        } else {
            arm_summary_.record(obs);
        }
        ++round_;
    }

    void end_task() override {
        switch (agent_.kind) {
            case AgentKind::MetaTS:
            case AgentKind::AdaTS:
            case AgentKind::AdaTSForced:
                if (env_.family == Family::LinearGaussian)
                    meta_ = end_task_linear(meta_, linear_summary_, believed_);
                else if (env_.family == Family::SemiBandit)
                    meta_ = end_task_semibandit(meta_, arm_summary_, believed_);
                else
                    meta_ = end_task_gaussian(meta_, arm_summary_, believed_);
                break;
            default: break;
        }
    }

    [[nodiscard]] const GaussianMetaPosterior& meta() const { return meta_; }
    [[nodiscard]] const TaskPosterior& posterior() const { return posterior_; }
    [[nodiscard]] const ExplorationSet& exploration() const { return exploration_; }

private:
    AgentSpec agent_;
    EnvironmentSpec env_;
    EnvironmentSpec believed_;
    std::size_t tasks_;
    GaussianMetaPosterior meta_;
    TaskPosterior posterior_;
    ExplorationSet exploration_;
    std::vector<Action> plan_;
    std::size_t round_ = 0;
    ArmTaskSummary arm_summary_;
    LinearTaskSummary linear_summary_;
};

/// Agents for the Beta-Bernoulli mixture family. AdaTS runs exact TS under
/// P_s = Σ_j Q_s(j) P(·; j); TS keeps the initial weights forever; MetaTS
/// samples one component per task; OracleTS and MisassignedTS use the true
/// and a wrong component respectively.
class MixtureAgent final : public Agent {
public:
    MixtureAgent(AgentSpec agent, EnvironmentSpec env)
        : agent_(agent), env_(std::move(env)), meta_(MixtureMetaPosterior::from_prior(env_)) {
        if (env_.family != Family::BernoulliMixture)
            throw std::invalid_argument("MixtureAgent: environment is not a Bernoulli mixture");
        if (agent_.kind == AgentKind::AdaTSForced)
            throw UnknownAgent("ada-ts-forced is not defined for the bernoulli-mixture family");
    }

    void begin_task(std::size_t, const TaskContext& ctx, RngStream& rng) override {
        const auto L = meta_.components.size();
        auto single = [&](std::size_t j) {
            Vector lw = Vector::Constant(static_cast<Eigen::Index>(L), -std::numeric_limits<double>::infinity());
            lw(static_cast<Eigen::Index>(j)) = 0.0;
            return MixtureTaskState::from_prior(lw, meta_.components);
        };
        switch (agent_.kind) {
            case AgentKind::AgnosticTS:
                state_ = MixtureTaskState::from_prior(env_.mixture_weights.array().log().matrix(), meta_.components);
                break;
            case AgentKind::AdaTS: state_ = MixtureTaskState::from_prior(meta_.log_weights, meta_.components); break;
            case AgentKind::MetaTS: state_ = single(sample_categorical_log(meta_.log_weights, rng)); break;
            case AgentKind::OracleTS:
            case AgentKind::MisassignedTS: {
                if (ctx.truth == nullptr) throw std::invalid_argument("oracle agents need the true component");
                const auto j = ctx.truth->component;
                state_ = single(agent_.kind == AgentKind::OracleTS ? j : (j + 1) % L);
                break;
            }
            case AgentKind::AdaTSForced: break;
        }
        counts_ = BernoulliCounts(env_.actions.arms);
    }

    Action select(RngStream& rng) override { return Action::single(mixture_ts_select(state_, rng)); }

    void observe(const Action& action, const Observation& obs) override {
        state_.observe(action.index(), obs.rewards.front());
        counts_.record(action.index(), obs.rewards.front());
    }

    void end_task() override {
        if (agent_.kind == AgentKind::AdaTS || agent_.kind == AgentKind::MetaTS) meta_ = mixture_update(meta_, counts_);
    }

    [[nodiscard]] const MixtureMetaPosterior& meta() const { return meta_; }
    [[nodiscard]] const MixtureTaskState& state() const { return state_; }

private:
    AgentSpec agent_;
    EnvironmentSpec env_;
    MixtureMetaPosterior meta_;
    MixtureTaskState state_;
    BernoulliCounts counts_;
};

inline std::unique_ptr<Agent> make_agent(const AgentSpec& agent, const EnvironmentSpec& env, std::size_t tasks) {
    if (env.family == Family::BernoulliMixture) return std::make_unique<MixtureAgent>(agent, env);
    return std::make_unique<GaussianAgent>(agent, env, tasks);
}

}  // namespace adats
