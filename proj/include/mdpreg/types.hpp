#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mdpreg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Thrown when a domain invariant is violated: malformed tensors, rows that
/// are not probability distributions, invalid indices, bad configuration.
class ValidationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Thrown when a gamma = 1 computation needs absorption into a terminal state
/// and the chain cannot provide it. Carries one offending state.
class NonAbsorbingError : public ValidationError {
  public:
    NonAbsorbingError(const std::string& what, int state)
        : ValidationError(what), offending_state(state) {}

    int offending_state;
};

/// Thrown on file and serialization problems.
class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Probability rows whose sum is within this distance of 1 are renormalized
/// exactly; rows outside are rejected. Downstream linear solves amplify
/// stochasticity violations, so the gate is tight.
inline constexpr double kRowSumTolerance = 1e-9;

/// Smallest admissible prior probability. log of anything below this is too
/// close to -inf for the soft Bellman operator to stay finite.
inline constexpr double kPriorFloor = 1e-12;

/// Tabular MDP: one |S| x |S| transition matrix and one reward matrix per
/// action, a discount factor, and a set of absorbing terminal states.
///
/// transitions[a](s, t) is the probability of moving s -> t under action a,
/// rewards[a](s, t) the reward collected on that move. Every terminal state z
/// satisfies transitions[a](z, z) = 1 and rewards[a](z, z) = 0 for all a.
///
/// Instances built through create() or the model file loader have been
/// validated and row-normalized; they are immutable by convention afterwards
/// and safe to share across concurrent readers.
struct MdpModel {
    int num_states = 0;
    int num_actions = 0;
    std::vector<Matrix> transitions;
    std::vector<Matrix> rewards;
    double discount = 1.0;
    std::vector<int> terminal_states;  ///< sorted, unique

    /// Validates every invariant and renormalizes probability rows that are
    /// within kRowSumTolerance of sum 1. Throws ValidationError naming the
    /// violated invariant otherwise. At discount 1 additionally requires a
    /// nonempty terminal set reachable from every state in the union support
    /// graph over actions (policy-specific absorption is checked by the
    /// solvers at solve time).
    static MdpModel create(int num_states, int num_actions,
                           std::vector<Matrix> transitions,
                           std::vector<Matrix> rewards, double discount,
                           std::vector<int> terminal_states);

    bool is_terminal(int state) const;

    /// Mask with entry s true iff s is terminal.
    std::vector<char> terminal_mask() const;

    int num_nonterminal() const {
        return num_states - static_cast<int>(terminal_states.size());
    }
};

/// Per-state probability distribution over actions; probs(s, a) is the
/// probability of taking action a at state s. Deterministic policies are
/// one-hot rows.
struct Policy {
    Matrix probs;

    /// Validates shape and rows (nonnegative, sum 1 within kRowSumTolerance,
    /// renormalized exactly).
    static Policy create(Matrix probs);

    /// One-hot policy taking actions[s] at state s.
    static Policy one_hot(const std::vector<int>& actions, int num_actions);

    static Policy uniform(int num_states, int num_actions);

    int num_states() const { return static_cast<int>(probs.rows()); }
    int num_actions() const { return static_cast<int>(probs.cols()); }
};

/// Expected discounted cumulative reward per state. Terminal states always
/// carry exactly 0.
struct ValueFunction {
    Vector values;
};

/// Nonnegative, not-all-zero weights over start states for the scalarized
/// objective e' v.
struct StartWeights {
    Vector weights;

    static StartWeights create(Vector weights);
    static StartWeights uniform(int num_states);
};

/// Prior knowledge about actions: per-state preferred action sets, the L1
/// penalty strength lambda, and the relative-entropy prior (kappa, q).
///
/// prior_probs(s, a) is the reference distribution q the entropy of a policy
/// is taken relative to; every entry must be at least kPriorFloor.
struct PriorSpec {
    std::vector<std::vector<int>> preferred;  ///< per state, sorted nonempty
    double lambda = 0.0;
    double kappa = 1.0;
    Matrix prior_probs;

    static PriorSpec create(std::vector<std::vector<int>> preferred,
                            double lambda, double kappa, Matrix prior_probs);

    /// Prior preferring the single action `preferred_action` at every state:
    /// q(s, preferred_action) = q_preferred, the rest split the remainder
    /// equally.
    static PriorSpec single_preference(int num_states, int num_actions,
                                       int preferred_action, double lambda,
                                       double kappa, double q_preferred);

    bool is_preferred(int state, int action) const;

    int num_states() const { return static_cast<int>(preferred.size()); }
};

}  // namespace mdpreg
