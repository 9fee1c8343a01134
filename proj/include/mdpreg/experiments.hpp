#pragma once

#include "mdpreg/empirical.hpp"
#include "mdpreg/solvers.hpp"
#include "mdpreg/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mdpreg {

/// Ring-of-states benchmark with an absorbing terminal state at index N-1
/// (states are stored 0-based; the generator follows the 1-based convention
/// used in its defining formulas, so stored state s corresponds to i = s+1).
/// Action 0 walks the ring downward with probability 0.35 and exits to the
/// terminal state with 0.65; action 1 walks upward with 0.25 and exits with
/// 0.75. Moving from i pays 2i+N inside the ring and i+N on exit. Discount 1.
/// Action 0 is optimal at every state.
MdpModel example1_model(int num_states);

/// Same ring geometry with symmetric transitions: both actions keep walking
/// with probability 0.45 and exit with 0.55. Rewards are drawn once per
/// (state, branch) from unit-variance Gaussians and frozen; action 0's means
/// exceed action 1's by one unit (6/3 versus 5/2 for walk/exit), so action 0
/// is optimal at most but not all states. Discount 1.
MdpModel example2_model(int num_states, std::uint64_t seed);

enum class SweepMethod { L1, RelativeEntropy };

enum class EvalMetric {
    ValuePerState,     ///< mean of v over non-terminal states
    WeightedObjective  ///< e' v with the configured weights
};

/// Protocol for the learn-on-sampled, evaluate-on-true sweeps.
///
/// Every trial t derives its sampling seed from (base_seed, t), builds an
/// empirical model, solves it at every grid point, and evaluates each learned
/// policy on the true model. The grid parameter is lambda for the L1 method
/// and the per-non-preferred-action prior mass for the relative-entropy
/// method (0.5 with two actions is the uniform prior).
struct SweepConfig {
    MdpModel true_model;
    std::string model_label;
    SweepMethod method = SweepMethod::L1;
    std::vector<double> grid;
    double kappa = 0.25;
    int preferred_action = 0;
    int samples_per_state_action = 100;
    double reward_noise_std = 0.0;
    RewardMode reward_mode = RewardMode::Exact;
    int num_trials = 50;
    std::uint64_t base_seed = 0;
    EvalMetric metric = EvalMetric::ValuePerState;
    Vector e_weights;  ///< empty selects uniform weights
    SolverConfig solver;

    void validate() const;

    /// Prior used at one grid point.
    PriorSpec prior_at(double grid_param) const;
};

struct GridPointStats {
    double grid_param = 0.0;
    double mean = 0.0;
    double stderr_of_mean = 0.0;  ///< sample standard deviation / sqrt(trials)
    int trials = 0;
    std::vector<double> per_trial;  ///< aligned with SweepResult::included_trials
};

struct TrialFailure {
    int trial = 0;
    std::string reason;
};

struct SweepResult {
    std::string model_label;
    std::string method_name;
    std::string metric_name;
    GridPointStats unregularized;  ///< hard-max solve, no penalty
    std::vector<GridPointStats> points;
    std::vector<int> included_trials;
    std::vector<TrialFailure> failures;
    std::uint64_t true_model_hash = 0;
    std::vector<std::uint64_t> empirical_model_hashes;
};

/// Runs the sweep protocol. Trials whose sampling or solving fails are
/// excluded from every grid point, counted, and reported; at least two trials
/// must survive.
SweepResult run_sweep(const SweepConfig& cfg);

struct ScalingPoint {
    int samples_per_state_action = 0;
    double best_param = 0.0;  ///< regularized grid point with the best mean
    double gap_mean = 0.0;    ///< paired mean of (best point - unregularized)
    double gap_stderr = 0.0;
    SweepResult sweep;
};

/// Reruns the sweep at each sample count and reports the regularization gap
/// (best regularized point minus the unregularized reference, paired by
/// trial).
std::vector<ScalingPoint> run_sample_scaling(const SweepConfig& base,
                                             const std::vector<int>& sample_grid);

struct ComparisonRow {
    std::string name;
    double objective_value = 0.0;
    double improvement_pct = 0.0;  ///< percent over the reference row
};

struct PolicyComparison {
    std::vector<ComparisonRow> rows;  ///< sorted by objective, best first
    std::string reference;
};

/// Learns the whole policy family on the empirical model (hard-max, L1,
/// relative-entropy, one-shot, regularized one-shot, every constant policy)
/// and scores each on the true model with e' v. Reference defaults to the
/// constant policy of the highest action index.
PolicyComparison evaluate_policy_suite(const MdpModel& true_model,
                                       const MdpModel& empirical_model,
                                       const PriorSpec& prior,
                                       const StartWeights& e,
                                       std::string reference = "");

/// Mean value over non-terminal states.
double value_per_state(const MdpModel& model, const Vector& values);

}  // namespace mdpreg
