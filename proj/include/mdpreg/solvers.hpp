#pragma once

#include "mdpreg/types.hpp"

namespace mdpreg {

/// Tie-breaking rule for greedy action extraction. Only one rule is defined;
/// it is carried explicitly so reports can echo it.
enum class TieBreak { LowestActionIndex };

struct SolverConfig {
    double tolerance = 1e-10;     ///< max-norm change at which iteration stops
    int max_iterations = 100000;
    TieBreak tie_break = TieBreak::LowestActionIndex;

    void validate() const;
};

/// Outcome of a Bellman-iteration solve. `converged` implies
/// `final_residual <= config.tolerance`.
struct SolveReport {
    Policy policy;
    ValueFunction values;
    int iterations = 0;
    double final_residual = 0.0;
    bool converged = false;
    SolverConfig config;
};

/// Exact policy evaluation: solves (I - gamma * P_pi) v = r_pi on the
/// non-terminal block with terminal values pinned to 0.
///
/// At discount 1 the chain must reach a terminal state from every
/// non-terminal state under the given policy's support; otherwise a
/// NonAbsorbingError naming an offending state is thrown.
ValueFunction policy_evaluation(const MdpModel& model, const Policy& policy);

/// Scalar objective e' v_pi.
double objective(const MdpModel& model, const Policy& policy,
                 const StartWeights& e);

/// Discounted visitation counts w_pi = (I - gamma * P_pi)^-T e. Satisfies
/// w_pi' r_pi = e' v_pi. At discount 1 the transposed system is solved on
/// the non-terminal block and terminal entries are 0.
Vector visitation(const MdpModel& model, const Policy& policy,
                  const StartWeights& e);

/// Hard-max value iteration: v(s) = max_a (R(s, a) + gamma * (P_a v)(s)).
/// Returns a deterministic policy, greedy in the fixed point, ties broken by
/// lowest action index.
SolveReport solve_unregularized(const MdpModel& model,
                                const SolverConfig& cfg = {});

/// L1-regularized solve: identical to solve_unregularized after lowering the
/// expected reward of every non-preferred action by prior.lambda. Exact ties
/// go to preferred actions. Reported values are those of the modified
/// rewards.
SolveReport solve_l1(const MdpModel& model, const PriorSpec& prior,
                     const SolverConfig& cfg = {});

/// Relative-entropy-regularized (soft) solve. The fixed point satisfies
///   v(s) = kappa * log sum_a exp((R(s,a) + kappa*log q(s,a)
///                                 + gamma*(P_a v)(s)) / kappa)
/// evaluated with max-subtraction, and the returned stochastic policy is the
/// softmax of the same exponents, computed in log space and normalized.
SolveReport solve_re(const MdpModel& model, const PriorSpec& prior,
                     const SolverConfig& cfg = {});

/// One-shot policy: per-state argmax of the expected immediate reward,
/// ignoring transitions. Ties go to the lowest action index.
Policy one_shot_policy(const MdpModel& model);

/// Regularized one-shot policy: a non-preferred action wins only when its
/// immediate reward minus prior.lambda strictly exceeds every preferred
/// action's immediate reward.
Policy one_shot_regularized(const MdpModel& model, const PriorSpec& prior);

/// Policy taking the given action at every state.
Policy constant_policy(int action, int num_states, int num_actions);

}  // namespace mdpreg
