#pragma once

#include "adats/gauss_core.hpp"
#include "adats/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace adats {

class InvalidInput : public std::invalid_argument {
public:
    explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

/// Everything the regret bounds read. Eigenvalues refer to the covariance
/// matrices Σ_q and Σ_0; per-arm fields are widths (σ, not σ²) and are only
/// read by the semi-bandit bound.
struct BoundInputs {
    std::size_t tasks = 1;   // m
    std::size_t rounds = 1;  // n
    std::size_t dim = 1;     // d, or K for semi-bandits
    std::size_t budget = 1;  // L
    double lambda1_sigma_q = 0.0;
    double lambda1_sigma_0 = 0.0;
    double lambdad_sigma_0 = 0.0;
    double noise_sigma = 1.0;
    std::size_t action_count = 1;
    double eta = 1.0;
    double delta = 1.0;
    double mu_star_norm_sq = 0.0;     // ‖μ*‖²
    double trace_sigma_sum = 0.0;     // tr(Σ_q + Σ_0)
    Vector sigma_q_arms;
    Vector sigma_0_arms;
    Vector mu_star_sq_arms;           // μ*(k)²

    void validate() const {
        if (tasks < 1 || rounds < 1 || dim < 1 || budget < 1 || action_count < 1)
            throw InvalidInput("counts m, n, d, L and |A| must be positive");
        if (!(noise_sigma > 0.0)) throw InvalidInput("noise sigma must be positive");
        if (!(delta > 0.0 && delta <= 1.0)) throw InvalidInput("delta must lie in (0, 1]");
        if (lambda1_sigma_q < 0.0 || lambda1_sigma_0 < 0.0 || lambdad_sigma_0 < 0.0 || mu_star_norm_sq < 0.0 ||
            trace_sigma_sum < 0.0)
            throw InvalidInput("eigenvalues, norms and traces must be non-negative");
        if (!std::isfinite(lambda1_sigma_q + lambda1_sigma_0 + lambdad_sigma_0 + mu_star_norm_sq + trace_sigma_sum))
            throw InvalidInput("bound inputs must be finite");
    }

    void validate_semibandit() const {
        validate();
        const auto k = static_cast<Eigen::Index>(dim);
        if (sigma_q_arms.size() != k || sigma_0_arms.size() != k || mu_star_sq_arms.size() != k)
            throw InvalidInput("per-arm vectors must have length K");
        if ((sigma_q_arms.array() < 0.0).any() || (sigma_0_arms.array() < 0.0).any() ||
            (mu_star_sq_arms.array() < 0.0).any())
            throw InvalidInput("per-arm widths must be non-negative");
    }
};

struct BoundTerm {
    std::string name;
    double value = 0.0;
};

struct BoundBreakdown {
    std::vector<BoundTerm> terms;
    double total = 0.0;
    double per_task_known = 0.0;  // R_δ(n; μ*)
    double multiplier = 0.0;      // factor in front of R_δ

    [[nodiscard]] double term(const std::string& name) const {
        for (const auto& t : terms)
            if (t.name == name) return t.value;
        throw InvalidInput("no bound term named '" + name + "'");
    }
};

namespace detail {
/// v / log(1 + v/σ²), continuously extended by σ² at v = 0.
inline double width_over_log(double v, double noise_var) {
    return v > 0.0 ? v / std::log1p(v / noise_var) : noise_var;
}
}  // namespace detail

/// Per-task regret with known μ* for the linear bandit.
inline double per_task_bound_linear(const BoundInputs& in) {
    in.validate();
    const double nv = in.noise_sigma * in.noise_sigma;
    const double n = static_cast<double>(in.rounds);
    const double d = static_cast<double>(in.dim);
    const double l0 = in.lambda1_sigma_0;
    const double confidence = std::log(4.0 * static_cast<double>(in.action_count) / in.delta);
    return 4.0 * std::sqrt(detail::width_over_log(l0, nv) * confidence) *
               std::sqrt(n * (d / 2.0) * std::log1p(n * l0 / nv)) +
           n * std::sqrt(2.0 * in.delta * l0);
}

/// Linear-bandit regret of AdaTS with forced exploration: learning μ*,
/// acting with known μ*, and the forced exploration rounds.
inline BoundBreakdown total_bound_linear(const BoundInputs& in) {
    in.validate();
    if (!(in.eta > 0.0)) throw InvalidInput("eta must be positive");
    const double nv = in.noise_sigma * in.noise_sigma;
    const double m = static_cast<double>(in.tasks);
    const double n = static_cast<double>(in.rounds);
    const double d = static_cast<double>(in.dim);
    const double lq = in.lambda1_sigma_q;
    const double l0 = in.lambda1_sigma_0;
    const double confidence = std::log(4.0 * static_cast<double>(in.action_count) / in.delta);

    const double meta_info = (d / 2.0) * std::log1p(m * lq / (in.lambdad_sigma_0 + nv / n));
    const double learning = 4.0 * std::sqrt(detail::width_over_log(lq + l0, nv) * confidence) * std::sqrt(m * n * meta_info);

    BoundBreakdown out;
    out.per_task_known = per_task_bound_linear(in);
    // R_δ vanishes at λ1(Σ0) = 0, where σ²/(η λ1(Σ0)) would be infinite
    out.multiplier = m + (1.0 + (l0 > 0.0 ? nv / (in.eta * l0) : 0.0)) * std::sqrt(m);
    const double forced = std::sqrt(m * d * (in.mu_star_norm_sq + in.trace_sigma_sum));
    out.terms = {{"learning_mu", learning}, {"per_task", out.multiplier * out.per_task_known},
                 {"forced_exploration", forced}};
    for (const auto& t : out.terms) out.total += t.value;
    return out;
}

/// Per-task regret with known μ* for the semi-bandit, averaged over arms.
inline double per_task_bound_semibandit(const BoundInputs& in) {
    in.validate_semibandit();
    const double nv = in.noise_sigma * in.noise_sigma;
    const double n = static_cast<double>(in.rounds);
    const double K = static_cast<double>(in.dim);
    const double L = static_cast<double>(in.budget);
    const double confidence = std::log(4.0 * K / in.delta);
    double avg = 0.0;
    double avg_var = 0.0;
    for (Eigen::Index k = 0; k < in.sigma_0_arms.size(); ++k) {
        const double v0 = in.sigma_0_arms(k) * in.sigma_0_arms(k);
        avg += detail::width_over_log(v0, nv) * std::log1p(n * v0 / nv) * confidence;
        avg_var += v0;
    }
    avg /= K;
    avg_var /= K;
    return 4.0 * std::sqrt(avg) * std::sqrt(n * K * L) + n * std::sqrt(2.0 * in.delta * avg_var);
}

inline BoundBreakdown total_bound_semibandit(const BoundInputs& in) {
    in.validate_semibandit();
    const double nv = in.noise_sigma * in.noise_sigma;
    const double m = static_cast<double>(in.tasks);
    const double n = static_cast<double>(in.rounds);
    const double K = static_cast<double>(in.dim);
    const double L = static_cast<double>(in.budget);
    const double confidence = std::log(4.0 * K / in.delta);

    double learning_avg = 0.0;
    double forced_sum = 0.0;
    double zero_width = 0.0;
    double max_ratio = 0.0;
    for (Eigen::Index k = 0; k < in.sigma_0_arms.size(); ++k) {
        const double v0 = in.sigma_0_arms(k) * in.sigma_0_arms(k);
        const double vq = in.sigma_q_arms(k) * in.sigma_q_arms(k);
        learning_avg += detail::width_over_log(v0 + vq, nv) * std::log1p(m * vq / (v0 + nv / n)) * confidence;
        forced_sum += in.mu_star_sq_arms(k) + v0 + vq;
        if (v0 == 0.0)
            zero_width += 1.0;
        else
            max_ratio = std::max(max_ratio, nv / v0);
    }
    learning_avg /= K;

    BoundBreakdown out;
    out.per_task_known = per_task_bound_semibandit(in);
    out.multiplier = m + (1.0 + max_ratio) * std::sqrt(m);
    const double learning = 4.0 * std::sqrt(learning_avg) * std::sqrt(m * n * K * L);
    const double forced = 2.0 * std::sqrt(m * K * forced_sum);
    const double zero = 2.0 * std::pow(m, 0.75) * n * std::sqrt(in.delta * zero_width * nv / K);
    out.terms = {{"learning_mu", learning},
                 {"forced_exploration", forced},
                 {"zero_width_arms", zero},
                 {"per_task", out.multiplier * out.per_task_known}};
    for (const auto& t : out.terms) out.total += t.value;
    return out;
}

struct MutualInfoCaps {
    double per_task = 0.0;  // cap on I(θ_s; H_s | μ*, H_{1:s-1})
    double meta = 0.0;      // cap on I(μ*; H_{1:m})
};

inline MutualInfoCaps mutual_info_caps(const BoundInputs& in) {
    in.validate();
    const double nv = in.noise_sigma * in.noise_sigma;
    const double d = static_cast<double>(in.dim);
    const double n = static_cast<double>(in.rounds);
    const double m = static_cast<double>(in.tasks);
    return {(d / 2.0) * std::log1p(n * in.lambda1_sigma_0 / nv),
            (d / 2.0) * std::log1p(m * in.lambda1_sigma_q / (in.lambdad_sigma_0 + nv / n))};
}

/// Bound inputs for a linear spec with a materialized action set. ‖μ*‖² is
/// replaced by its prior mean ‖μ_q‖² + tr(Σ_q), which upper-bounds the
/// Bayes average of the forced-exploration term.
inline BoundInputs linear_bound_inputs(const EnvironmentSpec& spec, std::size_t tasks, std::size_t rounds,
                                       double delta, double eta) {
    BoundInputs in;
    in.tasks = tasks;
    in.rounds = rounds;
    in.dim = spec.dim();
    in.lambda1_sigma_q = std::max(0.0, max_eigenvalue(spec.sigma_q));
    in.lambda1_sigma_0 = std::max(0.0, max_eigenvalue(spec.sigma_0));
    in.lambdad_sigma_0 = std::max(0.0, min_eigenvalue(spec.sigma_0));
    in.noise_sigma = spec.noise_sigma;
    in.action_count = spec.action_count();
    in.eta = eta;
    in.delta = delta;
    in.mu_star_norm_sq = spec.mu_q.squaredNorm() + spec.sigma_q.matrix().trace();
    in.trace_sigma_sum = spec.sigma_q.matrix().trace() + spec.sigma_0.matrix().trace();
    return in;
}

/// Bound inputs for an arm-indexed spec; μ*(k)² is replaced by μ_q,k² + σ²_q,k.
inline BoundInputs semibandit_bound_inputs(const EnvironmentSpec& spec, std::size_t tasks, std::size_t rounds,
                                           double delta) {
    BoundInputs in;
    in.tasks = tasks;
    in.rounds = rounds;
    in.dim = spec.actions.arms;
    in.budget = spec.family == Family::SemiBandit ? spec.actions.budget : 1;
    const Vector vq = spec.sigma_q.diag().cwiseMax(0.0);
    const Vector v0 = spec.sigma_0.diag().cwiseMax(0.0);
    in.lambda1_sigma_q = vq.maxCoeff();
    in.lambda1_sigma_0 = v0.maxCoeff();
    in.lambdad_sigma_0 = v0.minCoeff();
    in.noise_sigma = spec.noise_sigma;
    in.action_count = spec.actions.arms;
    in.delta = delta;
    in.sigma_q_arms = vq.cwiseSqrt();
    in.sigma_0_arms = v0.cwiseSqrt();
    in.mu_star_sq_arms = spec.mu_q.array().square().matrix() + vq;
    in.mu_star_norm_sq = in.mu_star_sq_arms.sum();
    in.trace_sigma_sum = vq.sum() + v0.sum();
    return in;
}

}  // namespace adats
