#include "mdpreg/types.hpp"

#include "mdpreg/mdp_core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mdpreg {

namespace {

std::string at(int action, int state) {
    std::ostringstream os;
    os << " (action " << action << ", state " << state << ")";
    return os.str();
}

using RowRef = Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>>;

/// Checks one probability row and renormalizes it exactly. `label` names the
/// owning tensor in error messages.
void normalize_row(RowRef row, const std::string& label) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < row.size(); ++j) {
        const double p = row[j];
        if (!std::isfinite(p)) throw ValidationError(label + ": non-finite probability entry");
        if (p < 0.0) throw ValidationError(label + ": negative probability entry");
        sum += p;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
        std::ostringstream os;
        os << label << ": row sums to " << sum << ", outside tolerance " << kRowSumTolerance;
        throw ValidationError(os.str());
    }
    row /= sum;
}

}  // namespace

bool MdpModel::is_terminal(int state) const {
    return std::binary_search(terminal_states.begin(), terminal_states.end(), state);
}

std::vector<char> MdpModel::terminal_mask() const {
    std::vector<char> mask(static_cast<size_t>(num_states), 0);
    for (int z : terminal_states) mask[static_cast<size_t>(z)] = 1;
    return mask;
}

MdpModel MdpModel::create(int num_states, int num_actions,
                          std::vector<Matrix> transitions,
                          std::vector<Matrix> rewards, double discount,
                          std::vector<int> terminal_states) {
    if (num_states < 1) throw ValidationError("num_states must be positive");
    if (num_actions < 1) throw ValidationError("num_actions must be positive");
    if (!(discount >= 0.0 && discount <= 1.0))
        throw ValidationError("discount must lie in [0, 1]");
    if (static_cast<int>(transitions.size()) != num_actions ||
        static_cast<int>(rewards.size()) != num_actions)
        throw ValidationError("expected one transition and one reward matrix per action");
    for (int a = 0; a < num_actions; ++a) {
        if (transitions[a].rows() != num_states || transitions[a].cols() != num_states)
            throw ValidationError("transition matrix has wrong shape" + at(a, -1));
        if (rewards[a].rows() != num_states || rewards[a].cols() != num_states)
            throw ValidationError("reward matrix has wrong shape" + at(a, -1));
    }

    std::sort(terminal_states.begin(), terminal_states.end());
    terminal_states.erase(std::unique(terminal_states.begin(), terminal_states.end()),
                          terminal_states.end());
    for (int z : terminal_states)
        if (z < 0 || z >= num_states)
            throw ValidationError("terminal state index out of range");

    MdpModel model;
    model.num_states = num_states;
    model.num_actions = num_actions;
    model.transitions = std::move(transitions);
    model.rewards = std::move(rewards);
    model.discount = discount;
    model.terminal_states = std::move(terminal_states);

    const std::vector<char> terminal = model.terminal_mask();
    for (int a = 0; a < num_actions; ++a) {
        for (int s = 0; s < num_states; ++s) {
            if (!model.rewards[a].row(s).allFinite())
                throw ValidationError("non-finite reward entry" + at(a, s));
            if (terminal[static_cast<size_t>(s)]) {
                // Terminal rows must already be the absorbing unit row; they
                // are then stored in exact form.
                if (std::abs(model.transitions[a](s, s) - 1.0) > kRowSumTolerance)
                    throw ValidationError("terminal state must self-loop with probability 1" + at(a, s));
                for (int t = 0; t < num_states; ++t) {
                    if (t != s && std::abs(model.transitions[a](s, t)) > kRowSumTolerance)
                        throw ValidationError("terminal state must not leave itself" + at(a, s));
                }
                if (model.rewards[a](s, s) != 0.0)
                    throw ValidationError("terminal self-loop reward must be exactly 0" + at(a, s));
                model.transitions[a].row(s).setZero();
                model.transitions[a](s, s) = 1.0;
            } else {
                normalize_row(model.transitions[a].row(s), "transition row" + at(a, s));
            }
        }
    }

    if (model.discount == 1.0) {
        if (model.terminal_states.empty())
            throw ValidationError("discount 1 requires a nonempty terminal state set");
        int offending = -1;
        if (!union_support_absorbing(model, &offending)) {
            std::ostringstream os;
            os << "discount 1 requires terminal reachability: state " << offending
               << " cannot reach a terminal state under any action";
            throw NonAbsorbingError(os.str(), offending);
        }
    }
    return model;
}

Policy Policy::create(Matrix probs) {
    if (probs.rows() < 1 || probs.cols() < 1)
        throw ValidationError("policy must have at least one state and one action");
    Policy policy;
    policy.probs = std::move(probs);
    for (Eigen::Index s = 0; s < policy.probs.rows(); ++s) {
        std::ostringstream label;
        label << "policy row (state " << s << ")";
        normalize_row(policy.probs.row(s), label.str());
    }
    return policy;
}

Policy Policy::one_hot(const std::vector<int>& actions, int num_actions) {
    Matrix probs = Matrix::Zero(static_cast<Eigen::Index>(actions.size()), num_actions);
    for (size_t s = 0; s < actions.size(); ++s) {
        const int a = actions[s];
        if (a < 0 || a >= num_actions)
            throw ValidationError("one-hot action index out of range");
        probs(static_cast<Eigen::Index>(s), a) = 1.0;
    }
    Policy policy;
    policy.probs = std::move(probs);
    return policy;
}

Policy Policy::uniform(int num_states, int num_actions) {
    if (num_states < 1 || num_actions < 1)
        throw ValidationError("policy must have at least one state and one action");
    Policy policy;
    policy.probs = Matrix::Constant(num_states, num_actions, 1.0 / num_actions);
    return policy;
}

StartWeights StartWeights::create(Vector weights) {
    if (weights.size() < 1) throw ValidationError("start weights must be nonempty");
    if (!weights.allFinite()) throw ValidationError("start weights must be finite");
    if ((weights.array() < 0.0).any())
        throw ValidationError("start weights must be nonnegative");
    if (weights.sum() <= 0.0)
        throw ValidationError("start weights must not be all zero");
    StartWeights e;
    e.weights = std::move(weights);
    return e;
}

StartWeights StartWeights::uniform(int num_states) {
    return create(Vector::Ones(num_states));
}

PriorSpec PriorSpec::create(std::vector<std::vector<int>> preferred, double lambda,
                            double kappa, Matrix prior_probs) {
    const int num_states = static_cast<int>(preferred.size());
    if (num_states < 1) throw ValidationError("prior needs at least one state");
    if (prior_probs.rows() != num_states)
        throw ValidationError("prior_probs rows must match the preferred map");
    const int num_actions = static_cast<int>(prior_probs.cols());
    if (num_actions < 1) throw ValidationError("prior needs at least one action");
    if (!(lambda >= 0.0)) throw ValidationError("lambda must be nonnegative");
    if (!(kappa > 0.0)) throw ValidationError("kappa must be positive");

    for (auto& set : preferred) {
        if (set.empty()) throw ValidationError("every state needs a nonempty preferred action set");
        std::sort(set.begin(), set.end());
        set.erase(std::unique(set.begin(), set.end()), set.end());
        for (int a : set)
            if (a < 0 || a >= num_actions)
                throw ValidationError("preferred action index out of range");
    }

    for (Eigen::Index s = 0; s < prior_probs.rows(); ++s) {
        if (prior_probs.row(s).minCoeff() < kPriorFloor) {
            std::ostringstream os;
            os << "prior probability below floor " << kPriorFloor << " (state " << s << ")";
            throw ValidationError(os.str());
        }
        std::ostringstream label;
        label << "prior row (state " << s << ")";
        normalize_row(prior_probs.row(s), label.str());
    }

    PriorSpec prior;
    prior.preferred = std::move(preferred);
    prior.lambda = lambda;
    prior.kappa = kappa;
    prior.prior_probs = std::move(prior_probs);
    return prior;
}

PriorSpec PriorSpec::single_preference(int num_states, int num_actions,
                                       int preferred_action, double lambda,
                                       double kappa, double q_preferred) {
    if (num_states < 1 || num_actions < 1)
        throw ValidationError("prior needs at least one state and one action");
    if (preferred_action < 0 || preferred_action >= num_actions)
        throw ValidationError("preferred action index out of range");
    if (!(q_preferred > 0.0 && q_preferred < 1.0) && !(num_actions == 1 && q_preferred == 1.0))
        throw ValidationError("q_preferred must lie in (0, 1)");
    const double rest =
        num_actions > 1 ? (1.0 - q_preferred) / (num_actions - 1) : 0.0;
    Matrix q = Matrix::Constant(num_states, num_actions, rest);
    q.col(preferred_action).setConstant(q_preferred);
    return create(std::vector<std::vector<int>>(num_states, {preferred_action}),
                  lambda, kappa, std::move(q));
}

bool PriorSpec::is_preferred(int state, int action) const {
    const auto& set = preferred[static_cast<size_t>(state)];
    return std::binary_search(set.begin(), set.end(), action);
}

}  // namespace mdpreg
