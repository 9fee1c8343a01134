#pragma once

#include "mdpreg/types.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace mdpreg {

/// How sampled models obtain their reward tensor.
enum class RewardMode {
    Exact,           ///< copy the true rewards unchanged
    PerSampleNoise,  ///< mean of per-sample draws r + N(0, sigma^2) per landed entry
    EntryNoise,      ///< one N(0, sigma^2) perturbation per observed entry
};

struct SamplingConfig {
    int samples_per_state_action = 100;
    double reward_noise_std = 0.0;
    std::uint64_t seed = 0;
    RewardMode reward_mode = RewardMode::Exact;

    void validate() const;
};

struct SessionStep {
    int action = 0;
    double reward = 0.0;
    int next_state = 0;
};

/// One rollout: a start state and the steps taken until termination or
/// truncation at the step cap.
struct Session {
    int start_state = 0;
    std::vector<SessionStep> steps;
    bool truncated = false;
};

struct SessionLog {
    std::vector<Session> sessions;
};

/// Observation counts behind an estimated model, plus the (state, action)
/// pairs never observed (their rows were routed to the terminal state).
struct CountsReport {
    Matrix observations;  ///< (s, a) -> number of observed transitions
    std::vector<std::pair<int, int>> unobserved;
};

struct EstimationResult {
    MdpModel model;
    CountsReport counts;
};

/// Discrepancy between two models of identical shape. Row norms are taken
/// over non-terminal states only; total variation is half the row L1.
struct ModelDistanceReport {
    std::vector<double> avg_row_l1_per_action;
    double avg_row_l1 = 0.0;
    double avg_tv = 0.0;
    double max_tv = 0.0;
    double reward_rmse = 0.0;
};

/// Empirical model from the true one: for every non-terminal (s, a) draws
/// n category samples from the true row and replaces it with the observed
/// frequencies. Terminal rows are copied exactly. Rewards follow
/// cfg.reward_mode; unobserved entries carry reward 0 in the noisy modes.
/// Identical (model, cfg) inputs produce bit-identical outputs.
MdpModel sample_transitions(const MdpModel& true_model, const SamplingConfig& cfg);

/// Model estimated by counting a session log: P = transition frequencies,
/// r = mean observed reward per transition. A (state, action) pair with no
/// observations is routed deterministically to `terminal_state` with reward 0
/// and flagged in the counts report.
EstimationResult estimate_from_logs(const SessionLog& log, int num_states,
                                    int num_actions, double discount = 1.0,
                                    int terminal_state = -1);

/// Rolls out `behavior` on the true model: starts drawn proportionally to
/// start_weights, sessions end on terminal entry or truncate at max_steps.
SessionLog generate_synthetic_logs(const MdpModel& true_model,
                                   const Policy& behavior, int num_sessions,
                                   const StartWeights& start_weights,
                                   int max_steps, std::uint64_t seed);

ModelDistanceReport model_distance(const MdpModel& a, const MdpModel& b);

}  // namespace mdpreg
