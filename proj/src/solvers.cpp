#include "mdpreg/solvers.hpp"

#include "mdpreg/mdp_core.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace mdpreg {

namespace {

void check_prior(const MdpModel& model, const PriorSpec& prior) {
    if (prior.num_states() != model.num_states ||
        prior.prior_probs.cols() != model.num_actions)
        throw ValidationError("prior shape does not match the model");
}

void check_weights(const MdpModel& model, const StartWeights& e) {
    if (e.weights.size() != model.num_states)
        throw ValidationError("start weights length does not match the model");
}

std::vector<int> nonterminal_indices(const MdpModel& model) {
    std::vector<int> free_states;
    free_states.reserve(static_cast<size_t>(model.num_states));
    const std::vector<char> terminal = model.terminal_mask();
    for (int s = 0; s < model.num_states; ++s)
        if (!terminal[static_cast<size_t>(s)]) free_states.push_back(s);
    return free_states;
}

void require_policy_absorbing(const MdpModel& model, const Matrix& transition,
                              const char* what) {
    int offending = -1;
    if (!transition_absorbing(transition, model.terminal_mask(), &offending)) {
        std::ostringstream os;
        os << "non-absorbing chain: state " << offending
           << " cannot reach a terminal state " << what;
        throw NonAbsorbingError(os.str(), offending);
    }
}

void require_union_absorbing(const MdpModel& model) {
    int offending = -1;
    if (!union_support_absorbing(model, &offending)) {
        std::ostringstream os;
        os << "non-absorbing chain: state " << offending
           << " cannot reach a terminal state under any action";
        throw NonAbsorbingError(os.str(), offending);
    }
}

/// Solves (I - gamma * P[free, free]) x = b[free] by dense LU and scatters
/// into a full-length vector with zeros elsewhere.
Vector solve_restricted(const Matrix& transition, const Vector& rhs, double gamma,
                        const std::vector<int>& free_states, int num_states,
                        bool transpose) {
    const int n = static_cast<int>(free_states.size());
    Vector full = Vector::Zero(num_states);
    if (n == 0) return full;
    Matrix system(n, n);
    Vector b(n);
    for (int i = 0; i < n; ++i) {
        b[i] = rhs[free_states[static_cast<size_t>(i)]];
        for (int j = 0; j < n; ++j) {
            const double p = transition(free_states[static_cast<size_t>(i)],
                                        free_states[static_cast<size_t>(j)]);
            system(i, j) = (i == j ? 1.0 : 0.0) - gamma * p;
        }
    }
    Eigen::PartialPivLU<Matrix> lu(transpose ? Matrix(system.transpose()) : system);
    const Vector x = lu.solve(b);
    for (int i = 0; i < n; ++i) full[free_states[static_cast<size_t>(i)]] = x[i];
    return full;
}

struct IterationOutcome {
    Vector values;
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
};

/// Q(s, a) = R_eff(s, a) + gamma * (P_a v)(s) for every state and action.
Matrix action_values(const MdpModel& model, const Matrix& effective_rewards,
                     const Vector& v) {
    Matrix q(model.num_states, model.num_actions);
    for (int a = 0; a < model.num_actions; ++a)
        q.col(a) = effective_rewards.col(a) + model.discount * (model.transitions[a] * v);
    return q;
}

/// Value iteration with the hard max backup. Iteration stops once the
/// max-norm change drops to half the requested tolerance so that one further
/// operator application still stays within it, which also covers the
/// non-expansive discount-1 case.
IterationOutcome hard_value_iteration(const MdpModel& model,
                                      const Matrix& effective_rewards,
                                      const SolverConfig& cfg) {
    IterationOutcome out;
    out.values = Vector::Zero(model.num_states);
    const double stop = 0.5 * cfg.tolerance;
    for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
        Vector next = action_values(model, effective_rewards, out.values)
                          .rowwise()
                          .maxCoeff();
        for (int z : model.terminal_states) next[z] = 0.0;
        out.residual = (next - out.values).lpNorm<Eigen::Infinity>();
        out.values = std::move(next);
        out.iterations = iter;
        if (out.residual <= stop) {
            out.converged = true;
            break;
        }
    }
    return out;
}

/// Log-sum-exp value iteration at temperature kappa, stabilized by
/// subtracting the per-state maximum exponent.
IterationOutcome soft_value_iteration(const MdpModel& model,
                                      const Matrix& effective_rewards,
                                      double kappa, const SolverConfig& cfg) {
    IterationOutcome out;
    out.values = Vector::Zero(model.num_states);
    const double stop = 0.5 * cfg.tolerance;
    for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
        const Matrix exponents = action_values(model, effective_rewards, out.values);
        const Vector peak = exponents.rowwise().maxCoeff();
        const Vector lse =
            ((exponents.colwise() - peak) / kappa).array().exp().rowwise().sum().log();
        Vector next = peak + kappa * lse;
        for (int z : model.terminal_states) next[z] = 0.0;
        out.residual = (next - out.values).lpNorm<Eigen::Infinity>();
        out.values = std::move(next);
        out.iterations = iter;
        if (out.residual <= stop) {
            out.converged = true;
            break;
        }
    }
    return out;
}

/// Greedy actions from a table of action values. Ties are exact equalities:
/// the lowest index wins, except that with a prior a preferred action beats a
/// non-preferred one.
std::vector<int> greedy_actions(const Matrix& q, const PriorSpec* prior) {
    std::vector<int> actions(static_cast<size_t>(q.rows()), 0);
    for (Eigen::Index s = 0; s < q.rows(); ++s) {
        int best = 0;
        for (int a = 1; a < q.cols(); ++a) {
            if (q(s, a) > q(s, best)) {
                best = a;
            } else if (prior && q(s, a) == q(s, best) &&
                       prior->is_preferred(static_cast<int>(s), a) &&
                       !prior->is_preferred(static_cast<int>(s), best)) {
                best = a;
            }
        }
        actions[static_cast<size_t>(s)] = best;
    }
    return actions;
}

SolveReport solve_hard(const MdpModel& model, const Matrix& effective_rewards,
                       const PriorSpec* prior, const SolverConfig& cfg) {
    cfg.validate();
    if (model.discount == 1.0) require_union_absorbing(model);

    const IterationOutcome out = hard_value_iteration(model, effective_rewards, cfg);
    const Matrix q = action_values(model, effective_rewards, out.values);

    SolveReport report;
    report.policy = Policy::one_hot(greedy_actions(q, prior), model.num_actions);
    if (model.discount == 1.0)
        require_policy_absorbing(model, policy_transition(model, report.policy),
                                 "under the greedy policy");
    report.values = ValueFunction{out.values};
    report.iterations = out.iterations;
    report.final_residual = out.residual;
    report.converged = out.converged;
    report.config = cfg;
    return report;
}

}  // namespace

void SolverConfig::validate() const {
    if (!(tolerance > 0.0)) throw ValidationError("solver tolerance must be positive");
    if (max_iterations < 1) throw ValidationError("max_iterations must be positive");
}

ValueFunction policy_evaluation(const MdpModel& model, const Policy& policy) {
    const Matrix transition = policy_transition(model, policy);
    const Vector reward = policy_reward(model, policy);
    if (model.discount == 1.0)
        require_policy_absorbing(model, transition, "under the given policy");

    const std::vector<int> free_states = nonterminal_indices(model);
    Vector v = solve_restricted(transition, reward, model.discount, free_states,
                                model.num_states, /*transpose=*/false);

    const double residual =
        (v - model.discount * (transition * v) - reward).lpNorm<Eigen::Infinity>();
    const double bound = 1e-8 * (1.0 + reward.lpNorm<Eigen::Infinity>());
    if (!(residual <= bound)) {
        std::ostringstream os;
        os << "policy evaluation residual " << residual << " exceeds " << bound;
        throw ValidationError(os.str());
    }
    return ValueFunction{std::move(v)};
}

double objective(const MdpModel& model, const Policy& policy,
                 const StartWeights& e) {
    check_weights(model, e);
    return e.weights.dot(policy_evaluation(model, policy).values);
}

Vector visitation(const MdpModel& model, const Policy& policy,
                  const StartWeights& e) {
    check_weights(model, e);
    const Matrix transition = policy_transition(model, policy);
    if (model.discount < 1.0) {
        // Full-space transposed solve; in particular gamma = 0 returns e.
        const Matrix system =
            Matrix::Identity(model.num_states, model.num_states) -
            model.discount * transition.transpose();
        return Eigen::PartialPivLU<Matrix>(system).solve(e.weights);
    }
    require_policy_absorbing(model, transition, "under the given policy");
    // Terminal visitation diverges at discount 1; the count is defined on the
    // non-terminal block with terminal entries 0.
    return solve_restricted(transition, e.weights, model.discount,
                            nonterminal_indices(model), model.num_states,
                            /*transpose=*/true);
}

SolveReport solve_unregularized(const MdpModel& model, const SolverConfig& cfg) {
    return solve_hard(model, expected_action_rewards(model), nullptr, cfg);
}

SolveReport solve_l1(const MdpModel& model, const PriorSpec& prior,
                     const SolverConfig& cfg) {
    check_prior(model, prior);
    Matrix rewards = expected_action_rewards(model);
    for (int s = 0; s < model.num_states; ++s)
        for (int a = 0; a < model.num_actions; ++a)
            if (!prior.is_preferred(s, a)) rewards(s, a) -= prior.lambda;
    return solve_hard(model, rewards, &prior, cfg);
}

SolveReport solve_re(const MdpModel& model, const PriorSpec& prior,
                     const SolverConfig& cfg) {
    cfg.validate();
    check_prior(model, prior);
    if (model.discount == 1.0) require_union_absorbing(model);

    // Folding kappa * log q into the rewards makes the iteration literally the
    // Shannon-regularized one on modified rewards.
    const Matrix effective_rewards =
        expected_action_rewards(model) + prior.kappa * prior.prior_probs.array().log().matrix();

    const IterationOutcome out =
        soft_value_iteration(model, effective_rewards, prior.kappa, cfg);

    // Softmax policy in log space: exponents shifted by the row max, then
    // normalized.
    const Matrix exponents = action_values(model, effective_rewards, out.values);
    const Vector peak = exponents.rowwise().maxCoeff();
    Matrix probs = ((exponents.colwise() - peak) / prior.kappa).array().exp();
    probs.array().colwise() /= probs.rowwise().sum().array();

    SolveReport report;
    report.policy = Policy::create(std::move(probs));
    report.values = ValueFunction{out.values};
    report.iterations = out.iterations;
    report.final_residual = out.residual;
    report.converged = out.converged;
    report.config = cfg;
    return report;
}

Policy one_shot_policy(const MdpModel& model) {
    return Policy::one_hot(greedy_actions(expected_action_rewards(model), nullptr),
                           model.num_actions);
}

Policy one_shot_regularized(const MdpModel& model, const PriorSpec& prior) {
    check_prior(model, prior);
    Matrix handicapped = expected_action_rewards(model);
    for (int s = 0; s < model.num_states; ++s)
        for (int a = 0; a < model.num_actions; ++a)
            if (!prior.is_preferred(s, a)) handicapped(s, a) -= prior.lambda;
    return Policy::one_hot(greedy_actions(handicapped, &prior), model.num_actions);
}

Policy constant_policy(int action, int num_states, int num_actions) {
    if (action < 0 || action >= num_actions)
        throw ValidationError("constant policy action index out of range");
    return Policy::one_hot(std::vector<int>(static_cast<size_t>(num_states), action),
                           num_actions);
}

}  // namespace mdpreg
