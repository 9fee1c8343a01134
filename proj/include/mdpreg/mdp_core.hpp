#pragma once

#include "mdpreg/types.hpp"

namespace mdpreg {

/// Expected one-step reward per (state, action):
/// R(s, a) = sum_t transitions[a](s, t) * rewards[a](s, t).
/// Rewards stored on zero-probability entries never contribute.
Matrix expected_action_rewards(const MdpModel& model);

/// Transition matrix induced by a policy:
/// P_pi(s, t) = sum_a transitions[a](s, t) * policy(s, a).
/// Every row of the result is again a probability distribution.
Matrix policy_transition(const MdpModel& model, const Policy& policy);

/// Expected one-step reward per state under a policy:
/// r_pi(s) = sum_a R(s, a) * policy(s, a).
Vector policy_reward(const MdpModel& model, const Policy& policy);

/// True iff every state reaches some terminal state in the directed graph
/// whose edges are the positive entries of `transition`. On failure
/// `offending` (if non-null) receives the lowest stuck state.
bool transition_absorbing(const Matrix& transition,
                          const std::vector<char>& terminal_mask,
                          int* offending = nullptr);

/// True iff every state reaches some terminal state in the union support
/// graph over all actions. This is the cheap necessary condition the solvers
/// check before any gamma = 1 computation.
bool union_support_absorbing(const MdpModel& model, int* offending = nullptr);

}  // namespace mdpreg
