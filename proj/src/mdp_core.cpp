#include "mdpreg/mdp_core.hpp"

#include <deque>

namespace mdpreg {

namespace {

void check_shapes(const MdpModel& model, const Policy& policy) {
    if (policy.num_states() != model.num_states ||
        policy.num_actions() != model.num_actions)
        throw ValidationError("policy shape does not match the model");
}

}  // namespace

Matrix expected_action_rewards(const MdpModel& model) {
    Matrix result(model.num_states, model.num_actions);
    for (int a = 0; a < model.num_actions; ++a)
        result.col(a) =
            (model.transitions[a].array() * model.rewards[a].array()).rowwise().sum();
    return result;
}

Matrix policy_transition(const MdpModel& model, const Policy& policy) {
    check_shapes(model, policy);
    Matrix result = Matrix::Zero(model.num_states, model.num_states);
    for (int a = 0; a < model.num_actions; ++a)
        result += policy.probs.col(a).asDiagonal() * model.transitions[a];
    return result;
}

Vector policy_reward(const MdpModel& model, const Policy& policy) {
    check_shapes(model, policy);
    return (expected_action_rewards(model).array() * policy.probs.array())
        .rowwise()
        .sum();
}

bool transition_absorbing(const Matrix& transition,
                          const std::vector<char>& terminal_mask, int* offending) {
    const int n = static_cast<int>(transition.rows());
    // Backward BFS from the terminal set along reversed support edges.
    std::vector<char> reaches(terminal_mask.begin(), terminal_mask.end());
    std::deque<int> queue;
    for (int s = 0; s < n; ++s)
        if (reaches[static_cast<size_t>(s)]) queue.push_back(s);
    while (!queue.empty()) {
        const int t = queue.front();
        queue.pop_front();
        for (int s = 0; s < n; ++s) {
            if (!reaches[static_cast<size_t>(s)] && transition(s, t) > 0.0) {
                reaches[static_cast<size_t>(s)] = 1;
                queue.push_back(s);
            }
        }
    }
    for (int s = 0; s < n; ++s) {
        if (!reaches[static_cast<size_t>(s)]) {
            if (offending) *offending = s;
            return false;
        }
    }
    return true;
}

bool union_support_absorbing(const MdpModel& model, int* offending) {
    Matrix unioned = Matrix::Zero(model.num_states, model.num_states);
    for (const Matrix& p : model.transitions) unioned += p;
    return transition_absorbing(unioned, model.terminal_mask(), offending);
}

}  // namespace mdpreg
