#include "mdpreg/experiments.hpp"

#include "mdpreg/io.hpp"
#include "mdpreg/mdp_core.hpp"
#include "mdpreg/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mdpreg {

namespace {

struct RingLayout {
    int down_target;  // 0-based target of the downward walk from stored state s
    int up_target;    // 0-based target of the upward walk
};

/// Ring targets in the generators' 1-based convention, mapped to storage.
/// For i = s + 1 in 1..N-1: down goes to N-1-(N-i) mod (N-1), up goes to
/// i mod (N-1) + 1; both stay inside the ring 1..N-1.
RingLayout ring_targets(int stored_state, int num_states) {
    const int n = num_states;
    const int i = stored_state + 1;
    RingLayout layout;
    layout.down_target = (n - 1 - (n - i) % (n - 1)) - 1;
    layout.up_target = (i % (n - 1) + 1) - 1;
    return layout;
}

MdpModel build_ring_model(int num_states, double walk_prob_down, double walk_prob_up,
                          const Matrix& walk_rewards, const Matrix& exit_rewards) {
    const int n = num_states;
    const int terminal = n - 1;
    std::vector<Matrix> transitions(2, Matrix::Zero(n, n));
    std::vector<Matrix> rewards(2, Matrix::Zero(n, n));
    for (int s = 0; s < terminal; ++s) {
        const RingLayout layout = ring_targets(s, n);
        transitions[0](s, layout.down_target) = walk_prob_down;
        transitions[0](s, terminal) = 1.0 - walk_prob_down;
        rewards[0](s, layout.down_target) = walk_rewards(s, 0);
        rewards[0](s, terminal) = exit_rewards(s, 0);
        transitions[1](s, layout.up_target) = walk_prob_up;
        transitions[1](s, terminal) = 1.0 - walk_prob_up;
        rewards[1](s, layout.up_target) = walk_rewards(s, 1);
        rewards[1](s, terminal) = exit_rewards(s, 1);
    }
    transitions[0](terminal, terminal) = 1.0;
    transitions[1](terminal, terminal) = 1.0;
    return MdpModel::create(n, 2, std::move(transitions), std::move(rewards), 1.0,
                            {terminal});
}

double sample_stddev(const std::vector<double>& values, double mean) {
    if (values.size() < 2) return 0.0;
    double sum_sq = 0.0;
    for (double v : values) sum_sq += (v - mean) * (v - mean);
    return std::sqrt(sum_sq / (static_cast<double>(values.size()) - 1.0));
}

GridPointStats finalize(double grid_param, std::vector<double> per_trial) {
    GridPointStats stats;
    stats.grid_param = grid_param;
    stats.trials = static_cast<int>(per_trial.size());
    double sum = 0.0;
    for (double v : per_trial) sum += v;
    stats.mean = stats.trials > 0 ? sum / stats.trials : 0.0;
    stats.stderr_of_mean =
        stats.trials > 0
            ? sample_stddev(per_trial, stats.mean) / std::sqrt(stats.trials)
            : 0.0;
    stats.per_trial = std::move(per_trial);
    return stats;
}

}  // namespace

MdpModel example1_model(int num_states) {
    if (num_states < 3) throw ValidationError("example1 requires at least 3 states");
    const int n = num_states;
    Matrix walk_rewards(n, 2);
    Matrix exit_rewards(n, 2);
    for (int s = 0; s < n; ++s) {
        const int i = s + 1;
        walk_rewards.row(s).setConstant(2.0 * i + n);
        exit_rewards.row(s).setConstant(1.0 * i + n);
    }
    return build_ring_model(n, 0.35, 0.25, walk_rewards, exit_rewards);
}

MdpModel example2_model(int num_states, std::uint64_t seed) {
    if (num_states < 3) throw ValidationError("example2 requires at least 3 states");
    const int n = num_states;
    Matrix walk_rewards(n, 2);
    Matrix exit_rewards(n, 2);
    SplitMix64 rng(seed);
    // Draw order per state: walk rewards for actions 0 and 1, then exit
    // rewards for actions 0 and 1.
    for (int s = 0; s + 1 < n; ++s) {
        walk_rewards(s, 0) = 6.0 + rng.normal();
        walk_rewards(s, 1) = 5.0 + rng.normal();
        exit_rewards(s, 0) = 3.0 + rng.normal();
        exit_rewards(s, 1) = 2.0 + rng.normal();
    }
    walk_rewards.row(n - 1).setZero();
    exit_rewards.row(n - 1).setZero();
    return build_ring_model(n, 0.45, 0.45, walk_rewards, exit_rewards);
}

void SweepConfig::validate() const {
    if (num_trials < 2)
        throw ValidationError("sweeps need at least 2 trials for a standard error");
    if (grid.empty()) throw ValidationError("sweep grid must be nonempty");
    if (samples_per_state_action < 1)
        throw ValidationError("samples_per_state_action must be at least 1");
    if (preferred_action < 0 || preferred_action >= true_model.num_actions)
        throw ValidationError("preferred action index out of range");
    if (metric == EvalMetric::WeightedObjective && e_weights.size() != 0 &&
        e_weights.size() != true_model.num_states)
        throw ValidationError("e weights length does not match the model");
    solver.validate();
    for (double param : grid) prior_at(param);  // fails fast on a bad grid point
}

PriorSpec SweepConfig::prior_at(double grid_param) const {
    const int num_actions = true_model.num_actions;
    if (method == SweepMethod::L1) {
        if (!(grid_param >= 0.0))
            throw ValidationError("lambda grid values must be nonnegative");
        return PriorSpec::single_preference(true_model.num_states, num_actions,
                                            preferred_action, grid_param, kappa, 0.5);
    }
    const double q_preferred = 1.0 - grid_param * (num_actions - 1);
    if (!(grid_param >= kPriorFloor) || !(q_preferred >= kPriorFloor))
        throw ValidationError("prior mass grid values must keep every entry above the floor");
    return PriorSpec::single_preference(true_model.num_states, num_actions,
                                        preferred_action, 0.0, kappa, q_preferred);
}

double value_per_state(const MdpModel& model, const Vector& values) {
    const std::vector<char> terminal = model.terminal_mask();
    double sum = 0.0;
    int count = 0;
    for (int s = 0; s < model.num_states; ++s) {
        if (terminal[static_cast<size_t>(s)]) continue;
        sum += values[s];
        ++count;
    }
    return count > 0 ? sum / count : 0.0;
}

SweepResult run_sweep(const SweepConfig& cfg) {
    cfg.validate();
    const MdpModel& true_model = cfg.true_model;
    const StartWeights e =
        cfg.e_weights.size() == 0 ? StartWeights::uniform(true_model.num_states)
                                  : StartWeights::create(cfg.e_weights);

    const auto score = [&](const Policy& policy) {
        const ValueFunction v = policy_evaluation(true_model, policy);
        return cfg.metric == EvalMetric::ValuePerState
                   ? value_per_state(true_model, v.values)
                   : e.weights.dot(v.values);
    };

    std::vector<PriorSpec> priors;
    priors.reserve(cfg.grid.size());
    for (double param : cfg.grid) priors.push_back(cfg.prior_at(param));

    SweepResult result;
    result.model_label = cfg.model_label;
    result.method_name = cfg.method == SweepMethod::L1 ? "l1" : "re";
    result.metric_name =
        cfg.metric == EvalMetric::ValuePerState ? "value_per_state" : "objective";
    result.true_model_hash = model_hash(true_model);

    std::vector<double> unregularized_scores;
    std::vector<std::vector<double>> grid_scores(cfg.grid.size());

    for (int trial = 0; trial < cfg.num_trials; ++trial) {
        SamplingConfig sampling;
        sampling.samples_per_state_action = cfg.samples_per_state_action;
        sampling.reward_noise_std = cfg.reward_noise_std;
        sampling.reward_mode = cfg.reward_mode;
        sampling.seed = SplitMix64::derive_seed(cfg.base_seed, trial);
        try {
            const MdpModel empirical = sample_transitions(true_model, sampling);

            const SolveReport unregularized = solve_unregularized(empirical, cfg.solver);
            if (!unregularized.converged)
                throw ValidationError("unregularized solve did not converge");
            const double reference_score = score(unregularized.policy);

            std::vector<double> trial_scores(cfg.grid.size());
            for (size_t g = 0; g < cfg.grid.size(); ++g) {
                const SolveReport report =
                    cfg.method == SweepMethod::L1
                        ? solve_l1(empirical, priors[g], cfg.solver)
                        : solve_re(empirical, priors[g], cfg.solver);
                if (!report.converged)
                    throw ValidationError("regularized solve did not converge");
                trial_scores[g] = score(report.policy);
            }

            unregularized_scores.push_back(reference_score);
            for (size_t g = 0; g < cfg.grid.size(); ++g)
                grid_scores[g].push_back(trial_scores[g]);
            result.included_trials.push_back(trial);
            result.empirical_model_hashes.push_back(model_hash(empirical));
        } catch (const ValidationError& error) {
            result.failures.push_back(TrialFailure{trial, error.what()});
        }
    }

    if (result.included_trials.size() < 2)
        throw ValidationError("fewer than 2 trials succeeded; cannot form a standard error");

    result.unregularized = finalize(0.0, std::move(unregularized_scores));
    for (size_t g = 0; g < cfg.grid.size(); ++g)
        result.points.push_back(finalize(cfg.grid[g], std::move(grid_scores[g])));
    return result;
}

std::vector<ScalingPoint> run_sample_scaling(const SweepConfig& base,
                                             const std::vector<int>& sample_grid) {
    if (sample_grid.empty()) throw ValidationError("sample grid must be nonempty");
    std::vector<ScalingPoint> points;
    points.reserve(sample_grid.size());
    for (int n : sample_grid) {
        SweepConfig cfg = base;
        cfg.samples_per_state_action = n;
        ScalingPoint point;
        point.samples_per_state_action = n;
        point.sweep = run_sweep(cfg);

        // Best regularized grid point; for the L1 method lambda = 0 is the
        // unregularized reference itself and is skipped.
        const GridPointStats* best = nullptr;
        for (const GridPointStats& stats : point.sweep.points) {
            if (base.method == SweepMethod::L1 && stats.grid_param == 0.0) continue;
            if (!best || stats.mean > best->mean) best = &stats;
        }
        if (!best)
            throw ValidationError("sample scaling needs at least one regularized grid point");

        point.best_param = best->grid_param;
        std::vector<double> gaps(best->per_trial.size());
        for (size_t i = 0; i < gaps.size(); ++i)
            gaps[i] = best->per_trial[i] - point.sweep.unregularized.per_trial[i];
        const GridPointStats gap_stats = finalize(point.best_param, std::move(gaps));
        point.gap_mean = gap_stats.mean;
        point.gap_stderr = gap_stats.stderr_of_mean;
        points.push_back(std::move(point));
    }
    return points;
}

PolicyComparison evaluate_policy_suite(const MdpModel& true_model,
                                       const MdpModel& empirical_model,
                                       const PriorSpec& prior,
                                       const StartWeights& e,
                                       std::string reference) {
    if (true_model.num_states != empirical_model.num_states ||
        true_model.num_actions != empirical_model.num_actions)
        throw ValidationError("true and empirical model shapes differ");

    PolicyComparison comparison;
    const auto add = [&](std::string name, const Policy& policy) {
        comparison.rows.push_back(
            ComparisonRow{std::move(name), objective(true_model, policy, e), 0.0});
    };

    add("unregularized", solve_unregularized(empirical_model).policy);
    add("l1", solve_l1(empirical_model, prior).policy);
    add("re", solve_re(empirical_model, prior).policy);
    add("osp", one_shot_policy(empirical_model));
    add("osp_reg", one_shot_regularized(empirical_model, prior));
    for (int a = 0; a < empirical_model.num_actions; ++a)
        add("const_" + std::to_string(a),
            constant_policy(a, empirical_model.num_states, empirical_model.num_actions));

    if (reference.empty())
        reference = "const_" + std::to_string(empirical_model.num_actions - 1);
    comparison.reference = reference;
    const auto ref = std::find_if(comparison.rows.begin(), comparison.rows.end(),
                                  [&](const ComparisonRow& row) { return row.name == reference; });
    if (ref == comparison.rows.end())
        throw ValidationError("unknown reference policy: " + reference);
    const double ref_value = ref->objective_value;
    if (ref_value == 0.0)
        throw ValidationError("reference objective is zero; percent improvement undefined");
    for (ComparisonRow& row : comparison.rows)
        row.improvement_pct =
            100.0 * (row.objective_value - ref_value) / std::abs(ref_value);

    std::stable_sort(comparison.rows.begin(), comparison.rows.end(),
                     [](const ComparisonRow& a, const ComparisonRow& b) {
                         return a.objective_value > b.objective_value;
                     });
    return comparison;
}

}  // namespace mdpreg
