#include "mdpreg/io.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace mdpreg {

namespace {

using nlohmann::json;

constexpr int kModelFileVersion = 1;

void require_keys(const json& document, const std::set<std::string>& allowed,
                  const std::set<std::string>& required, const char* what) {
    for (const auto& item : document.items())
        if (!allowed.count(item.key()))
            throw IoError(std::string(what) + ": unknown key '" + item.key() + "'");
    for (const std::string& key : required)
        if (!document.contains(key))
            throw IoError(std::string(what) + ": missing key '" + key + "'");
}

double number_at(const json& node, const char* what) {
    if (!node.is_number()) throw IoError(std::string(what) + ": expected a number");
    return node.get<double>();
}

void append_matrix(std::string& out, const Matrix& m) {
    out += '[';
    for (Eigen::Index s = 0; s < m.rows(); ++s) {
        if (s > 0) out += ',';
        out += '[';
        for (Eigen::Index t = 0; t < m.cols(); ++t) {
            if (t > 0) out += ',';
            out += format_double(m(s, t));
        }
        out += ']';
    }
    out += ']';
}

Matrix parse_matrix(const json& node, int rows, int cols, const char* what) {
    if (!node.is_array() || static_cast<int>(node.size()) != rows)
        throw IoError(std::string(what) + ": expected " + std::to_string(rows) + " rows");
    Matrix m(rows, cols);
    for (int s = 0; s < rows; ++s) {
        const json& row = node[static_cast<size_t>(s)];
        if (!row.is_array() || static_cast<int>(row.size()) != cols)
            throw IoError(std::string(what) + ": expected " + std::to_string(cols) +
                          " columns per row");
        for (int t = 0; t < cols; ++t)
            m(s, t) = number_at(row[static_cast<size_t>(t)], what);
    }
    return m;
}

void append_grid_point_json(std::string& out, const GridPointStats& stats,
                            bool numeric_param) {
    out += "{\"grid_param\":";
    out += numeric_param ? format_double(stats.grid_param) : std::string("null");
    out += ",\"mean\":" + format_double(stats.mean);
    out += ",\"stderr\":" + format_double(stats.stderr_of_mean);
    out += ",\"trials\":" + std::to_string(stats.trials);
    out += ",\"per_trial\":[";
    for (size_t i = 0; i < stats.per_trial.size(); ++i) {
        if (i > 0) out += ',';
        out += format_double(stats.per_trial[i]);
    }
    out += "]}";
}

std::string json_escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string format_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::ostringstream content;
    content << in.rdbuf();
    if (in.bad()) throw IoError("read failure: " + path);
    return content.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << content;
    out.flush();
    if (!out) throw IoError("write failure: " + path);
}

std::string model_to_text(const MdpModel& model) {
    std::string out = "{\n";
    out += "  \"version\": " + std::to_string(kModelFileVersion) + ",\n";
    out += "  \"num_states\": " + std::to_string(model.num_states) + ",\n";
    out += "  \"num_actions\": " + std::to_string(model.num_actions) + ",\n";
    out += "  \"discount\": " + format_double(model.discount) + ",\n";
    out += "  \"terminal_states\": [";
    for (size_t i = 0; i < model.terminal_states.size(); ++i) {
        if (i > 0) out += ',';
        out += std::to_string(model.terminal_states[i]);
    }
    out += "],\n  \"transitions\": [";
    for (int a = 0; a < model.num_actions; ++a) {
        if (a > 0) out += ',';
        out += "\n    ";
        append_matrix(out, model.transitions[static_cast<size_t>(a)]);
    }
    out += "\n  ],\n  \"rewards\": [";
    for (int a = 0; a < model.num_actions; ++a) {
        if (a > 0) out += ',';
        out += "\n    ";
        append_matrix(out, model.rewards[static_cast<size_t>(a)]);
    }
    out += "\n  ]\n}\n";
    return out;
}

MdpModel model_from_text(const std::string& text) {
    json document;
    try {
        document = json::parse(text);
    } catch (const json::exception& error) {
        throw IoError(std::string("model file parse error: ") + error.what());
    }
    if (!document.is_object()) throw IoError("model file: expected a JSON object");
    const std::set<std::string> keys = {"version",         "num_states", "num_actions",
                                        "discount",        "terminal_states",
                                        "transitions",     "rewards"};
    require_keys(document, keys, keys, "model file");
    if (!document["version"].is_number_integer() ||
        document["version"].get<int>() != kModelFileVersion)
        throw IoError("model file: unsupported version");

    const int num_states = document["num_states"].get<int>();
    const int num_actions = document["num_actions"].get<int>();
    if (num_states < 1 || num_actions < 1)
        throw IoError("model file: num_states and num_actions must be positive");
    const double discount = number_at(document["discount"], "model file discount");

    std::vector<int> terminal_states;
    for (const json& z : document["terminal_states"]) {
        if (!z.is_number_integer()) throw IoError("model file: terminal_states must be integers");
        terminal_states.push_back(z.get<int>());
    }

    const auto parse_tensor = [&](const json& node, const char* what) {
        if (!node.is_array() || static_cast<int>(node.size()) != num_actions)
            throw IoError(std::string(what) + ": expected one matrix per action");
        std::vector<Matrix> tensor;
        tensor.reserve(static_cast<size_t>(num_actions));
        for (int a = 0; a < num_actions; ++a)
            tensor.push_back(
                parse_matrix(node[static_cast<size_t>(a)], num_states, num_states, what));
        return tensor;
    };

    try {
        return MdpModel::create(num_states, num_actions,
                                parse_tensor(document["transitions"], "model file transitions"),
                                parse_tensor(document["rewards"], "model file rewards"),
                                discount, std::move(terminal_states));
    } catch (const ValidationError&) {
        throw;  // loading keeps validation errors distinct from parse errors
    }
}

void save_model(const MdpModel& model, const std::string& path) {
    write_text_file(path, model_to_text(model));
}

MdpModel load_model(const std::string& path) {
    return model_from_text(read_text_file(path));
}

std::string report_to_text(const SolveReport& report) {
    std::string out = "{\n  \"version\": 1,\n  \"policy\": ";
    append_matrix(out, report.policy.probs);
    out += ",\n  \"values\": [";
    for (Eigen::Index s = 0; s < report.values.values.size(); ++s) {
        if (s > 0) out += ',';
        out += format_double(report.values.values[s]);
    }
    out += "],\n  \"iterations\": " + std::to_string(report.iterations);
    out += ",\n  \"final_residual\": " + format_double(report.final_residual);
    out += ",\n  \"converged\": " + std::string(report.converged ? "true" : "false");
    out += ",\n  \"config\": {\"tolerance\": " + format_double(report.config.tolerance);
    out += ", \"max_iterations\": " + std::to_string(report.config.max_iterations);
    out += ", \"tie_break\": \"lowest-action-index\"}\n}\n";
    return out;
}

void save_report(const SolveReport& report, const std::string& path) {
    write_text_file(path, report_to_text(report));
}

Policy load_policy(const std::string& path) {
    json document;
    try {
        document = json::parse(read_text_file(path));
    } catch (const json::exception& error) {
        throw IoError(std::string("policy file parse error: ") + error.what());
    }
    if (!document.is_object() || !document.contains("policy"))
        throw IoError("policy file: missing 'policy' field");
    const json& node = document["policy"];
    if (!node.is_array() || node.empty() || !node[0].is_array())
        throw IoError("policy file: 'policy' must be a matrix");
    const int rows = static_cast<int>(node.size());
    const int cols = static_cast<int>(node[0].size());
    return Policy::create(parse_matrix(node, rows, cols, "policy file"));
}

std::string session_log_to_text(const SessionLog& log) {
    std::string out;
    for (const Session& session : log.sessions) {
        out += std::to_string(session.start_state);
        out += ';';
        for (const SessionStep& step : session.steps) {
            out += " (" + std::to_string(step.action) + ',' + format_double(step.reward) +
                   ',' + std::to_string(step.next_state) + ')';
        }
        out += session.truncated ? "; TRUNC\n" : "; END\n";
    }
    return out;
}

SessionLog session_log_from_text(const std::string& text) {
    SessionLog log;
    std::istringstream lines(text);
    std::string line;
    int line_number = 0;
    while (std::getline(lines, line)) {
        ++line_number;
        const auto fail = [&](const std::string& why) {
            throw IoError("session log line " + std::to_string(line_number) + ": " + why);
        };
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

        const size_t first = line.find(';');
        const size_t last = line.rfind(';');
        if (first == std::string::npos || last == first)
            fail("expected `start; steps; END|TRUNC`");

        Session session;
        try {
            session.start_state = std::stoi(line.substr(0, first));
        } catch (const std::exception&) {
            fail("bad start state");
        }

        std::string marker = line.substr(last + 1);
        marker.erase(0, marker.find_first_not_of(" \t"));
        marker.erase(marker.find_last_not_of(" \t\r") + 1);
        if (marker == "TRUNC")
            session.truncated = true;
        else if (marker != "END")
            fail("unknown end marker '" + marker + "'");

        std::istringstream steps(line.substr(first + 1, last - first - 1));
        std::string token;
        while (steps >> token) {
            SessionStep step;
            char open = 0, comma1 = 0, comma2 = 0, close = 0;
            std::istringstream parser(token);
            parser >> open >> step.action >> comma1 >> step.reward >> comma2 >>
                step.next_state >> close;
            if (!parser || open != '(' || comma1 != ',' || comma2 != ',' || close != ')')
                fail("bad step '" + token + "'");
            session.steps.push_back(step);
        }
        log.sessions.push_back(std::move(session));
    }
    return log;
}

void save_session_log(const SessionLog& log, const std::string& path) {
    write_text_file(path, session_log_to_text(log));
}

SessionLog load_session_log(const std::string& path) {
    return session_log_from_text(read_text_file(path));
}

std::string counts_report_to_text(const CountsReport& counts) {
    std::string out = "unobserved_pairs " + std::to_string(counts.unobserved.size()) + "\n";
    for (const auto& [state, action] : counts.unobserved)
        out += std::to_string(state) + " " + std::to_string(action) + "\n";
    out += "observations " + std::to_string(counts.observations.rows()) + " " +
           std::to_string(counts.observations.cols()) + "\n";
    for (Eigen::Index s = 0; s < counts.observations.rows(); ++s) {
        for (Eigen::Index a = 0; a < counts.observations.cols(); ++a) {
            if (a > 0) out += ' ';
            out += format_double(counts.observations(s, a));
        }
        out += '\n';
    }
    return out;
}

std::string sweep_summary_csv(const SweepResult& result) {
    std::string out = "grid_param,value_mean,value_stderr,trials,metric_name\n";
    const auto row = [&](const std::string& param, const GridPointStats& stats) {
        out += param + ',' + format_double(stats.mean) + ',' +
               format_double(stats.stderr_of_mean) + ',' + std::to_string(stats.trials) +
               ',' + result.metric_name + '\n';
    };
    row("unregularized", result.unregularized);
    for (const GridPointStats& stats : result.points)
        row(format_double(stats.grid_param), stats);
    return out;
}

std::string sweep_trials_csv(const SweepResult& result) {
    std::string out = "trial,grid_param,value\n";
    for (size_t i = 0; i < result.included_trials.size(); ++i) {
        const std::string trial = std::to_string(result.included_trials[i]);
        out += trial + ",unregularized," +
               format_double(result.unregularized.per_trial[i]) + '\n';
        for (const GridPointStats& stats : result.points)
            out += trial + ',' + format_double(stats.grid_param) + ',' +
                   format_double(stats.per_trial[i]) + '\n';
    }
    return out;
}

std::string sweep_json(const SweepConfig& cfg, const SweepResult& result) {
    std::string out = "{\n  \"config\": {";
    out += "\"model\": \"" + json_escape(result.model_label) + "\"";
    out += ", \"method\": \"" + result.method_name + "\"";
    out += ", \"metric\": \"" + result.metric_name + "\"";
    out += ", \"grid\": [";
    for (size_t i = 0; i < cfg.grid.size(); ++i) {
        if (i > 0) out += ',';
        out += format_double(cfg.grid[i]);
    }
    out += "], \"kappa\": " + format_double(cfg.kappa);
    out += ", \"preferred_action\": " + std::to_string(cfg.preferred_action);
    out += ", \"samples_per_state_action\": " + std::to_string(cfg.samples_per_state_action);
    out += ", \"reward_noise_std\": " + format_double(cfg.reward_noise_std);
    const char* mode = cfg.reward_mode == RewardMode::Exact ? "exact"
                       : cfg.reward_mode == RewardMode::PerSampleNoise
                           ? "per-sample-noise"
                           : "entry-noise";
    out += std::string(", \"reward_mode\": \"") + mode + "\"";
    out += ", \"trials\": " + std::to_string(cfg.num_trials);
    out += ", \"base_seed\": " + std::to_string(cfg.base_seed);
    out += ", \"tolerance\": " + format_double(cfg.solver.tolerance);
    out += ", \"max_iterations\": " + std::to_string(cfg.solver.max_iterations);
    out += "},\n  \"true_model_hash\": \"" + hash_hex(result.true_model_hash) + "\",\n";
    out += "  \"empirical_model_hashes\": [";
    for (size_t i = 0; i < result.empirical_model_hashes.size(); ++i) {
        if (i > 0) out += ',';
        out += "\"" + hash_hex(result.empirical_model_hashes[i]) + "\"";
    }
    out += "],\n  \"included_trials\": [";
    for (size_t i = 0; i < result.included_trials.size(); ++i) {
        if (i > 0) out += ',';
        out += std::to_string(result.included_trials[i]);
    }
    out += "],\n  \"failures\": [";
    for (size_t i = 0; i < result.failures.size(); ++i) {
        if (i > 0) out += ',';
        out += "{\"trial\": " + std::to_string(result.failures[i].trial) +
               ", \"reason\": \"" + json_escape(result.failures[i].reason) + "\"}";
    }
    out += "],\n  \"unregularized\": ";
    append_grid_point_json(out, result.unregularized, /*numeric_param=*/false);
    out += ",\n  \"points\": [";
    for (size_t i = 0; i < result.points.size(); ++i) {
        if (i > 0) out += ',';
        out += "\n    ";
        append_grid_point_json(out, result.points[i], /*numeric_param=*/true);
    }
    out += "\n  ]\n}\n";
    return out;
}

std::uint64_t model_hash(const MdpModel& model) {
    std::uint64_t hash = 0xCBF29CE484222325ULL;  // FNV-1a offset basis
    const auto mix_bytes = [&hash](const void* data, size_t size) {
        const unsigned char* bytes = static_cast<const unsigned char*>(data);
        for (size_t i = 0; i < size; ++i) {
            hash ^= bytes[i];
            hash *= 0x100000001B3ULL;  // FNV prime
        }
    };
    const auto mix_int = [&](std::int64_t value) { mix_bytes(&value, sizeof(value)); };
    const auto mix_double = [&](double value) { mix_bytes(&value, sizeof(value)); };

    mix_int(model.num_states);
    mix_int(model.num_actions);
    mix_double(model.discount);
    mix_int(static_cast<std::int64_t>(model.terminal_states.size()));
    for (int z : model.terminal_states) mix_int(z);
    for (const auto& tensor : {&model.transitions, &model.rewards})
        for (const Matrix& m : *tensor)
            for (Eigen::Index s = 0; s < m.rows(); ++s)
                for (Eigen::Index t = 0; t < m.cols(); ++t) mix_double(m(s, t));
    return hash;
}

std::string hash_hex(std::uint64_t hash) {
    char buffer[17];
    std::snprintf(buffer, sizeof(buffer), "%016llx",
                  static_cast<unsigned long long>(hash));
    return buffer;
}

}  // namespace mdpreg
