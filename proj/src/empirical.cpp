#include "mdpreg/empirical.hpp"

#include "mdpreg/rng.hpp"

#include <cmath>
#include <sstream>

namespace mdpreg {

void SamplingConfig::validate() const {
    if (samples_per_state_action < 1)
        throw ValidationError("samples_per_state_action must be at least 1");
    if (!(reward_noise_std >= 0.0))
        throw ValidationError("reward_noise_std must be nonnegative");
}

MdpModel sample_transitions(const MdpModel& true_model, const SamplingConfig& cfg) {
    cfg.validate();
    const int num_states = true_model.num_states;
    const int num_actions = true_model.num_actions;
    const int n = cfg.samples_per_state_action;
    const std::vector<char> terminal = true_model.terminal_mask();

    std::vector<Matrix> transitions(static_cast<size_t>(num_actions),
                                    Matrix::Zero(num_states, num_states));
    std::vector<Matrix> rewards;
    if (cfg.reward_mode == RewardMode::Exact) {
        rewards = true_model.rewards;
    } else {
        rewards.assign(static_cast<size_t>(num_actions),
                       Matrix::Zero(num_states, num_states));
    }

    std::vector<int> counts(static_cast<size_t>(num_states), 0);
    std::vector<double> reward_sums(static_cast<size_t>(num_states), 0.0);
    for (int a = 0; a < num_actions; ++a) {
        for (int s = 0; s < num_states; ++s) {
            if (terminal[static_cast<size_t>(s)]) {
                transitions[static_cast<size_t>(a)].row(s) =
                    true_model.transitions[static_cast<size_t>(a)].row(s);
                if (cfg.reward_mode != RewardMode::Exact)
                    rewards[static_cast<size_t>(a)].row(s) =
                        true_model.rewards[static_cast<size_t>(a)].row(s);
                continue;
            }
            // One substream per (action, state) row, so results do not depend
            // on the order rows are processed in.
            SplitMix64 rng = SplitMix64::derive(
                cfg.seed, static_cast<std::uint64_t>(a) * num_states + s);
            std::fill(counts.begin(), counts.end(), 0);
            std::fill(reward_sums.begin(), reward_sums.end(), 0.0);
            const Eigen::RowVectorXd true_row =
                true_model.transitions[static_cast<size_t>(a)].row(s);
            for (int draw = 0; draw < n; ++draw) {
                const int t = rng.categorical(true_row);
                ++counts[static_cast<size_t>(t)];
                if (cfg.reward_mode == RewardMode::PerSampleNoise)
                    reward_sums[static_cast<size_t>(t)] +=
                        true_model.rewards[static_cast<size_t>(a)](s, t) +
                        cfg.reward_noise_std * rng.normal();
            }
            for (int t = 0; t < num_states; ++t) {
                const int c = counts[static_cast<size_t>(t)];
                if (c == 0) continue;
                transitions[static_cast<size_t>(a)](s, t) =
                    static_cast<double>(c) / static_cast<double>(n);
                if (cfg.reward_mode == RewardMode::PerSampleNoise)
                    rewards[static_cast<size_t>(a)](s, t) =
                        reward_sums[static_cast<size_t>(t)] / static_cast<double>(c);
                else if (cfg.reward_mode == RewardMode::EntryNoise)
                    rewards[static_cast<size_t>(a)](s, t) =
                        true_model.rewards[static_cast<size_t>(a)](s, t) +
                        cfg.reward_noise_std * rng.normal();
            }
        }
    }

    return MdpModel::create(num_states, num_actions, std::move(transitions),
                            std::move(rewards), true_model.discount,
                            true_model.terminal_states);
}

EstimationResult estimate_from_logs(const SessionLog& log, int num_states,
                                    int num_actions, double discount,
                                    int terminal_state) {
    if (num_states < 1 || num_actions < 1)
        throw ValidationError("estimated model needs at least one state and one action");
    if (terminal_state < 0) terminal_state = num_states - 1;
    if (terminal_state >= num_states)
        throw ValidationError("terminal state index out of range");

    std::vector<Matrix> transition_counts(static_cast<size_t>(num_actions),
                                          Matrix::Zero(num_states, num_states));
    std::vector<Matrix> reward_sums(static_cast<size_t>(num_actions),
                                    Matrix::Zero(num_states, num_states));

    for (size_t i = 0; i < log.sessions.size(); ++i) {
        const Session& session = log.sessions[i];
        int state = session.start_state;
        if (state < 0 || state >= num_states) {
            std::ostringstream os;
            os << "session " << i << ": start state out of range";
            throw ValidationError(os.str());
        }
        for (const SessionStep& step : session.steps) {
            if (step.action < 0 || step.action >= num_actions ||
                step.next_state < 0 || step.next_state >= num_states) {
                std::ostringstream os;
                os << "session " << i << ": step index out of range";
                throw ValidationError(os.str());
            }
            if (!std::isfinite(step.reward)) {
                std::ostringstream os;
                os << "session " << i << ": non-finite reward";
                throw ValidationError(os.str());
            }
            transition_counts[static_cast<size_t>(step.action)](state, step.next_state) += 1.0;
            reward_sums[static_cast<size_t>(step.action)](state, step.next_state) += step.reward;
            state = step.next_state;
        }
    }

    CountsReport counts;
    counts.observations = Matrix::Zero(num_states, num_actions);
    std::vector<Matrix> transitions(static_cast<size_t>(num_actions),
                                    Matrix::Zero(num_states, num_states));
    std::vector<Matrix> rewards(static_cast<size_t>(num_actions),
                                Matrix::Zero(num_states, num_states));

    for (int s = 0; s < num_states; ++s) {
        for (int a = 0; a < num_actions; ++a) {
            if (s == terminal_state) {
                transitions[static_cast<size_t>(a)](s, s) = 1.0;
                continue;
            }
            const double total = transition_counts[static_cast<size_t>(a)].row(s).sum();
            counts.observations(s, a) = total;
            if (total == 0.0) {
                counts.unobserved.emplace_back(s, a);
                transitions[static_cast<size_t>(a)](s, terminal_state) = 1.0;
                continue;
            }
            for (int t = 0; t < num_states; ++t) {
                const double c = transition_counts[static_cast<size_t>(a)](s, t);
                if (c == 0.0) continue;
                transitions[static_cast<size_t>(a)](s, t) = c / total;
                rewards[static_cast<size_t>(a)](s, t) =
                    reward_sums[static_cast<size_t>(a)](s, t) / c;
            }
        }
    }

    MdpModel model = MdpModel::create(num_states, num_actions, std::move(transitions),
                                      std::move(rewards), discount, {terminal_state});
    return EstimationResult{std::move(model), std::move(counts)};
}

SessionLog generate_synthetic_logs(const MdpModel& true_model,
                                   const Policy& behavior, int num_sessions,
                                   const StartWeights& start_weights,
                                   int max_steps, std::uint64_t seed) {
    if (behavior.num_states() != true_model.num_states ||
        behavior.num_actions() != true_model.num_actions)
        throw ValidationError("behavior policy shape does not match the model");
    if (start_weights.weights.size() != true_model.num_states)
        throw ValidationError("start weights length does not match the model");
    if (num_sessions < 0) throw ValidationError("num_sessions must be nonnegative");
    if (max_steps < 1) throw ValidationError("max_steps must be at least 1");

    const Eigen::RowVectorXd start_probs =
        start_weights.weights.transpose() / start_weights.weights.sum();
    const std::vector<char> terminal = true_model.terminal_mask();

    SessionLog log;
    log.sessions.reserve(static_cast<size_t>(num_sessions));
    for (int i = 0; i < num_sessions; ++i) {
        SplitMix64 rng = SplitMix64::derive(seed, static_cast<std::uint64_t>(i));
        Session session;
        session.start_state = rng.categorical(start_probs);
        int state = session.start_state;
        while (!terminal[static_cast<size_t>(state)]) {
            if (static_cast<int>(session.steps.size()) >= max_steps) {
                session.truncated = true;
                break;
            }
            const int action = rng.categorical(behavior.probs.row(state));
            const int next = rng.categorical(
                true_model.transitions[static_cast<size_t>(action)].row(state));
            session.steps.push_back(SessionStep{
                action, true_model.rewards[static_cast<size_t>(action)](state, next), next});
            state = next;
        }
        log.sessions.push_back(std::move(session));
    }
    return log;
}

ModelDistanceReport model_distance(const MdpModel& a, const MdpModel& b) {
    if (a.num_states != b.num_states || a.num_actions != b.num_actions)
        throw ValidationError("model shapes differ");
    if (a.terminal_states != b.terminal_states)
        throw ValidationError("model terminal sets differ");

    const std::vector<char> terminal = a.terminal_mask();
    ModelDistanceReport report;
    report.avg_row_l1_per_action.assign(static_cast<size_t>(a.num_actions), 0.0);

    double reward_sq_sum = 0.0;
    long reward_cells = 0;
    const int rows = a.num_nonterminal();
    for (int action = 0; action < a.num_actions; ++action) {
        double l1_sum = 0.0;
        for (int s = 0; s < a.num_states; ++s) {
            if (terminal[static_cast<size_t>(s)]) continue;
            const double l1 = (a.transitions[static_cast<size_t>(action)].row(s) -
                               b.transitions[static_cast<size_t>(action)].row(s))
                                  .lpNorm<1>();
            l1_sum += l1;
            report.max_tv = std::max(report.max_tv, 0.5 * l1);
            reward_sq_sum += (a.rewards[static_cast<size_t>(action)].row(s) -
                              b.rewards[static_cast<size_t>(action)].row(s))
                                 .squaredNorm();
            reward_cells += a.num_states;
        }
        report.avg_row_l1_per_action[static_cast<size_t>(action)] =
            rows > 0 ? l1_sum / rows : 0.0;
        report.avg_row_l1 += l1_sum;
    }
    const long total_rows = static_cast<long>(rows) * a.num_actions;
    report.avg_row_l1 = total_rows > 0 ? report.avg_row_l1 / total_rows : 0.0;
    report.avg_tv = 0.5 * report.avg_row_l1;
    report.reward_rmse =
        reward_cells > 0 ? std::sqrt(reward_sq_sum / reward_cells) : 0.0;
    return report;
}

}  // namespace mdpreg
