#pragma once

#include "adats/agents.hpp"
#include "adats/bounds.hpp"
#include "adats/harness.hpp"
#include "adats/hierarchy.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace adats::cli {

class UsageError : public std::invalid_argument {
public:
    explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

enum class Subcommand { Run, Bound, Sweep };

struct CliInvocation {
    Subcommand subcommand = Subcommand::Run;
    std::string env;
    std::optional<std::size_t> arms;
    std::optional<std::size_t> dim;
    std::optional<std::size_t> budget;
    std::optional<std::size_t> components;
    double sigma_q = 0.5;
    double sigma_0 = 0.1;
    double noise = 1.0;
    std::optional<std::string> sigma_q_arms;  // comma list of per-arm widths
    std::optional<std::string> sigma_0_arms;
    std::optional<std::size_t> tasks;
    std::optional<std::size_t> rounds;
    std::optional<std::size_t> runs;
    std::optional<std::string> agents;
    std::uint64_t seed = 0;
    bool common_tasks = true;
    std::optional<std::string> out;
    std::optional<std::string> trace_out;
    std::optional<std::string> config;
    std::size_t threads = 1;
    std::optional<double> delta;
    std::optional<double> eta;
    std::optional<std::string> sigma_q_list;
    std::optional<std::string> arms_list;
    std::optional<std::string> dim_list;

    friend bool operator==(const CliInvocation&, const CliInvocation&) = default;
};

// ---- small text helpers -------------------------------------------------

/// Shortest round-trip decimal, '.' separator regardless of locale.
inline std::string format_real(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

inline std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

template <typename T>
T parse_number(const std::string& text, const std::string& flag) {
    T v{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw UsageError(flag + ": cannot parse '" + text + "'");
    return v;
}

template <typename T>
std::vector<T> parse_number_list(const std::string& text, const std::string& flag) {
    std::vector<T> out;
    for (const auto& item : split_list(text)) out.push_back(parse_number<T>(item, flag));
    if (out.empty()) throw UsageError(flag + ": empty list");
    return out;
}

/// Flat key=value lines, `#` comments, keys are flag names without dashes.
inline std::vector<std::string> read_config_tokens(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("--config: cannot open '" + path + "'");
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        line = line.substr(first, line.find_last_not_of(" \t\r") + 1 - first);
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw UsageError("--config: expected key=value, got '" + line + "'");
        auto key = line.substr(0, eq);
        auto value = line.substr(eq + 1);
        key.erase(key.find_last_not_of(" \t") + 1);
        value.erase(0, value.find_first_not_of(" \t"));
        if (key == "config") throw UsageError("--config: nested config files are not supported");
        tokens.push_back("--" + key);
        tokens.push_back(value);
    }
    return tokens;
}

// ---- parse / format -----------------------------------------------------

namespace detail {

inline void add_common(CLI::App& app, CliInvocation& inv) {
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.add_option("--env", inv.env, "gaussian | linear | semibandit | bernoulli-mixture")
        ->required()
        ->check(CLI::IsMember({"gaussian", "linear", "semibandit", "bernoulli-mixture"}));
    app.add_option("--arms", inv.arms, "number of arms K (linear: overrides K = 5d)");
    app.add_option("--dim", inv.dim, "feature dimension d (linear)");
    app.add_option("--budget", inv.budget, "subset size L (semibandit)");
    app.add_option("--components", inv.components, "mixture component count (bernoulli-mixture, default 2)");
    app.add_option("--sigma-q", inv.sigma_q, "meta-prior width");
    app.add_option("--sigma-0", inv.sigma_0, "task-prior width");
    app.add_option("--noise", inv.noise, "reward noise sigma");
    app.add_option("--sigma-q-arms", inv.sigma_q_arms, "per-arm meta-prior widths, comma list");
    app.add_option("--sigma-0-arms", inv.sigma_0_arms, "per-arm task-prior widths, comma list");
    app.add_option("--tasks", inv.tasks, "tasks m")->required();
    app.add_option("--rounds", inv.rounds, "rounds per task n")->required();
    app.add_option("--seed", inv.seed, "64-bit seed");
    app.add_option("--config", inv.config, "key=value file; its entries override flags");
}

inline void add_experiment(CLI::App& app, CliInvocation& inv) {
    app.add_option("--runs", inv.runs, "replications")->required();
    app.add_option("--agents", inv.agents, "comma list: ts, oracle-ts, meta-ts, ada-ts, ada-ts+, ada-ts-, "
                                           "ada-ts-forced, misassigned-ts")
        ->required();
    app.add_option("--common-tasks", inv.common_tasks, "share (mu*, theta) across agents within a run");
    app.add_option("--out", inv.out, "output CSV path (sweep: path prefix)")->required();
    app.add_option("--threads", inv.threads, "worker threads");
}

}  // namespace detail

/// argv without the program name. Throws UsageError naming the bad flag.
/// `--help` is reported as CLI::CallForHelp.
inline CliInvocation parse(std::vector<std::string> args) {
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
        if (args[i] == "--config") {
            auto extra = read_config_tokens(args[i + 1]);
            args.insert(args.end(), extra.begin(), extra.end());
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            auto extra = read_config_tokens(args[i].substr(9));
            args.insert(args.end(), extra.begin(), extra.end());
            break;
        }
    }

    CliInvocation inv;
    CLI::App app{"Meta-learning Thompson sampling experiments", "adats"};
    app.require_subcommand(1, 1);
    auto* run = app.add_subcommand("run", "run an experiment and write the regret curve CSV");
    auto* bound = app.add_subcommand("bound", "evaluate the regret upper bound and print its terms");
    auto* sweep = app.add_subcommand("sweep", "run a grid over sigma_q (and K or d), one CSV per cell");
    for (auto* sc : {run, bound, sweep}) detail::add_common(*sc, inv);
    detail::add_experiment(*run, inv);
    detail::add_experiment(*sweep, inv);
    run->add_option("--trace-out", inv.trace_out, "optional per-run trace CSV");
    bound->add_option("--delta", inv.delta, "confidence parameter, default 1/n^2");
    bound->add_option("--eta", inv.eta, "override the forced-exploration constant");
    sweep->add_option("--sigma-q-list", inv.sigma_q_list, "comma list of meta-prior widths")->required();
    sweep->add_option("--arms-list", inv.arms_list, "comma list of K values");
    sweep->add_option("--dim-list", inv.dim_list, "comma list of d values");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        throw;
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }
    inv.subcommand = run->parsed() ? Subcommand::Run : bound->parsed() ? Subcommand::Bound : Subcommand::Sweep;

    const bool linear = inv.env == "linear";
    if (linear && !inv.dim) throw UsageError("--dim is required for --env linear");
    if (!linear && !inv.arms && !inv.sigma_q_arms && !inv.arms_list)
        throw UsageError("--arms is required for --env " + inv.env);
    if (inv.env == "semibandit" && !inv.budget) throw UsageError("--budget is required for --env semibandit");
    if (inv.subcommand == Subcommand::Bound && inv.env == "bernoulli-mixture")
        throw UsageError("--env: no regret bound exists for bernoulli-mixture");
    if (inv.agents)
        for (const auto& a : split_list(*inv.agents)) try {
                parse_agent(a);
            } catch (const UnknownAgent& e) {
                throw UsageError(std::string("--agents: ") + e.what());
            }
    if (inv.delta && !(*inv.delta > 0.0 && *inv.delta <= 1.0)) throw UsageError("--delta must lie in (0, 1]");
    if (inv.threads < 1) throw UsageError("--threads must be >= 1");
    if (inv.sigma_q_list) parse_number_list<double>(*inv.sigma_q_list, "--sigma-q-list");
    if (inv.arms_list) parse_number_list<std::size_t>(*inv.arms_list, "--arms-list");
    if (inv.dim_list) parse_number_list<std::size_t>(*inv.dim_list, "--dim-list");
    return inv;
}

/// Canonical argv for an invocation; parse(format(x)) == x.
inline std::vector<std::string> format(const CliInvocation& inv) {
    std::vector<std::string> a;
    a.push_back(inv.subcommand == Subcommand::Run ? "run" : inv.subcommand == Subcommand::Bound ? "bound" : "sweep");
    auto put = [&](const char* flag, const std::string& v) {
        a.push_back(flag);
        a.push_back(v);
    };
    auto put_size = [&](const char* flag, const std::optional<std::size_t>& v) {
        if (v) put(flag, std::to_string(*v));
    };
    auto put_str = [&](const char* flag, const std::optional<std::string>& v) {
        if (v) put(flag, *v);
    };
    put("--env", inv.env);
    put_size("--arms", inv.arms);
    put_size("--dim", inv.dim);
    put_size("--budget", inv.budget);
    put_size("--components", inv.components);
    put("--sigma-q", format_real(inv.sigma_q));
    put("--sigma-0", format_real(inv.sigma_0));
    put("--noise", format_real(inv.noise));
    put_str("--sigma-q-arms", inv.sigma_q_arms);
    put_str("--sigma-0-arms", inv.sigma_0_arms);
    put_size("--tasks", inv.tasks);
    put_size("--rounds", inv.rounds);
    put("--seed", std::to_string(inv.seed));
    if (inv.subcommand != Subcommand::Bound) {
        put_size("--runs", inv.runs);
        put_str("--agents", inv.agents);
        put("--common-tasks", inv.common_tasks ? "true" : "false");
        put_str("--out", inv.out);
        put("--threads", std::to_string(inv.threads));
    }
    put_str("--trace-out", inv.trace_out);
    if (inv.delta) put("--delta", format_real(*inv.delta));
    if (inv.eta) put("--eta", format_real(*inv.eta));
    put_str("--sigma-q-list", inv.sigma_q_list);
    put_str("--arms-list", inv.arms_list);
    put_str("--dim-list", inv.dim_list);
    return a;
}

// ---- invocation → model -------------------------------------------------

inline EnvironmentSpec build_spec(const CliInvocation& inv) {
    const double sq = inv.sigma_q;
    const double s0 = inv.sigma_0;
    if (inv.env == "linear") {
        const std::size_t d = *inv.dim;
        return linear_bandit(d, inv.arms.value_or(5 * d), sq, s0, inv.noise);
    }
    if (inv.env == "bernoulli-mixture") return alternating_beta_mixture(*inv.arms, inv.components.value_or(2));

    std::size_t k = inv.arms.value_or(0);
    Vector wq, w0;
    if (inv.sigma_q_arms) {
        auto v = parse_number_list<double>(*inv.sigma_q_arms, "--sigma-q-arms");
        wq = Eigen::Map<Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
        if (k == 0) k = v.size();
    }
    if (inv.sigma_0_arms) {
        auto v = parse_number_list<double>(*inv.sigma_0_arms, "--sigma-0-arms");
        w0 = Eigen::Map<Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
        if (k == 0) k = v.size();
    }
    const auto kk = static_cast<Eigen::Index>(k);
    if (wq.size() == 0) wq = Vector::Constant(kk, sq);
    if (w0.size() == 0) w0 = Vector::Constant(kk, s0);
    if (wq.size() != kk || w0.size() != kk) throw UsageError("per-arm width lists must have K entries");

    EnvironmentSpec spec = semi_bandit(inv.env == "semibandit" ? *inv.budget : 1, wq, w0, inv.noise);
    if (inv.env == "gaussian") spec.family = Family::GaussianArms;
    return spec;
}

inline ExperimentConfig build_config(const CliInvocation& inv) {
    ExperimentConfig cfg;
    cfg.spec = build_spec(inv);
    for (const auto& a : split_list(inv.agents.value_or(""))) cfg.agents.push_back(parse_agent(a));
    cfg.tasks = inv.tasks.value_or(1);
    cfg.rounds = inv.rounds.value_or(1);
    cfg.runs = inv.runs.value_or(1);
    cfg.seed = inv.seed;
    cfg.common_tasks = inv.common_tasks;
    cfg.threads = inv.threads;
    return cfg;
}

// ---- CSV ----------------------------------------------------------------

inline void emit_csv(const ExperimentResult& result, std::ostream& out) {
    out << "agent,run,task,round,instant_regret,cum_regret\n";
    for (std::size_t a = 0; a < result.agent_labels.size(); ++a)
        for (std::size_t r = 0; r < result.runs; ++r) {
            const auto& tr = result.trace(a, r);
            if (!tr.ok) continue;
            for (std::size_t c = 0; c < tr.instant.size(); ++c)
                out << result.agent_labels[a] << ',' << r << ',' << c / result.rounds + 1 << ','
                    << c % result.rounds + 1 << ',' << format_real(tr.instant[c]) << ','
                    << format_real(tr.cumulative[c]) << '\n';
        }
}

inline void emit_csv(const AggregateCurve& curve, std::ostream& out) {
    out << "agent,task,round,mean_cum_regret,stderr\n";
    for (std::size_t a = 0; a < curve.agent_labels.size(); ++a)
        for (std::size_t c = 0; c < curve.mean[a].size(); ++c)
            out << curve.agent_labels[a] << ',' << c / curve.rounds + 1 << ',' << c % curve.rounds + 1 << ','
                << format_real(curve.mean[a][c]) << ',' << format_real(curve.standard_error[a][c]) << '\n';
}

template <typename T>
void emit_csv(const T& data, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    emit_csv(data, out);
    if (!out) throw IoError("write to '" + path + "' failed");
}

// ---- subcommands --------------------------------------------------------

/// Regret-bound breakdown for the invocation's environment. Linear: η comes
/// from the exploration actions of run 0's action set unless --eta is given.
inline BoundBreakdown compute_bound(const CliInvocation& inv) {
    const ExperimentConfig cfg = build_config(inv);
    const double n = static_cast<double>(cfg.rounds);
    const double delta = inv.delta.value_or(1.0 / (n * n));
    if (cfg.spec.family == Family::LinearGaussian) {
        const World world = sample_world(cfg, 0, 0);
        const double eta = inv.eta.value_or(choose_exploration_actions(world.spec).eta);
        return total_bound_linear(linear_bound_inputs(world.spec, cfg.tasks, cfg.rounds, delta, eta));
    }
    return total_bound_semibandit(semibandit_bound_inputs(cfg.spec, cfg.tasks, cfg.rounds, delta));
}

inline void print_bound(const BoundBreakdown& b, std::ostream& out) {
    for (const auto& t : b.terms) out << "term." << t.name << '=' << format_real(t.value) << '\n';
    out << "info.per_task_known=" << format_real(b.per_task_known) << '\n';
    out << "info.multiplier=" << format_real(b.multiplier) << '\n';
    out << "total=" << format_real(b.total) << '\n';
}

inline int run_experiment_command(const CliInvocation& inv, std::ostream& out, std::ostream& err) {
    const ExperimentConfig cfg = build_config(inv);
    const ExperimentResult result = run_experiment(cfg);
    const auto failures = result.failures();
    for (const auto& f : failures) err << "run failed: " << f << '\n';
    const AggregateCurve curve = aggregate(result);
    emit_csv(curve, *inv.out);
    if (inv.trace_out) emit_csv(result, *inv.trace_out);
    for (const auto& label : curve.agent_labels)
        out << "final agent=" << label << " mean_cum_regret=" << format_real(final_regret(curve, label))
            << " stderr=" << format_real(final_stderr(curve, label)) << '\n';
    return failures.empty() ? kExitOk : kExitRuntime;
}

inline int run_sweep_command(const CliInvocation& inv, std::ostream& out, std::ostream& err) {
    const auto widths = parse_number_list<double>(*inv.sigma_q_list, "--sigma-q-list");
    const bool linear = inv.env == "linear";
    std::vector<std::size_t> sizes;
    if (linear && inv.dim_list)
        sizes = parse_number_list<std::size_t>(*inv.dim_list, "--dim-list");
    else if (!linear && inv.arms_list)
        sizes = parse_number_list<std::size_t>(*inv.arms_list, "--arms-list");
    else
        sizes = {linear ? *inv.dim : inv.arms.value_or(0)};

    int code = kExitOk;
    for (auto size : sizes)
        for (double w : widths) {
            CliInvocation cell = inv;
            cell.subcommand = Subcommand::Run;
            cell.sigma_q = w;
            if (linear) {
                cell.dim = size;
                if (inv.dim_list) cell.arms.reset();
            } else {
                cell.arms = size;
            }
            const std::string name = (linear ? "d" : "K") + std::to_string(size) + "_sq" + format_real(w);
            cell.out = *inv.out + "_" + name + ".csv";
            cell.trace_out.reset();
            std::ostringstream cell_out;
            code = std::max(code, run_experiment_command(cell, cell_out, err));
            std::istringstream lines(cell_out.str());
            for (std::string line; std::getline(lines, line);) out << "cell=" << name << ' ' << line << '\n';
        }
    return code;
}

/// Entry point shared by the executable and the tests.
inline int run_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CliInvocation inv;
    try {
        inv = parse(args);
    } catch (const CLI::CallForHelp&) {
        out << "usage: adats {run|bound|sweep} --env ENV --tasks M --rounds N [options]\n"
               "run `adats <subcommand> --help` for the flag list\n";
        return kExitOk;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }
    try {
        switch (inv.subcommand) {
            case Subcommand::Run: return run_experiment_command(inv, out, err);
            case Subcommand::Sweep: return run_sweep_command(inv, out, err);
            case Subcommand::Bound: print_bound(compute_bound(inv), out); return kExitOk;
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitRuntime;
}

}  // namespace adats::cli
