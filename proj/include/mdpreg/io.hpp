#pragma once

#include "mdpreg/empirical.hpp"
#include "mdpreg/experiments.hpp"
#include "mdpreg/solvers.hpp"
#include "mdpreg/types.hpp"

#include <cstdint>
#include <string>

namespace mdpreg {

/// All numeric fields in the textual formats are written with 17 significant
/// digits, so a load/save round trip reproduces every double bit-exactly.
std::string format_double(double value);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

/// Model file schema (version 1): a JSON document with fields `version`,
/// `num_states`, `num_actions`, `discount`, `terminal_states`, `transitions`
/// (nested arrays indexed [action][state][target]) and `rewards` (same
/// shape). Unknown keys are rejected; loading validates the full model.
std::string model_to_text(const MdpModel& model);
MdpModel model_from_text(const std::string& text);
void save_model(const MdpModel& model, const std::string& path);
MdpModel load_model(const std::string& path);

/// Solve report document: policy matrix, value vector, iteration count,
/// final residual, convergence flag, and the solver configuration echo.
std::string report_to_text(const SolveReport& report);
void save_report(const SolveReport& report, const std::string& path);

/// Reads the `policy` field of a report document (or of a bare
/// `{"policy": [[...]]}` document) and validates it.
Policy load_policy(const std::string& path);

/// Session log: one session per line,
///   `start_state; (action,reward,next_state) ...; END|TRUNC`.
std::string session_log_to_text(const SessionLog& log);
SessionLog session_log_from_text(const std::string& text);
void save_session_log(const SessionLog& log, const std::string& path);
SessionLog load_session_log(const std::string& path);

std::string counts_report_to_text(const CountsReport& counts);

/// Sweep artifacts: the aggregate CSV (`grid_param,value_mean,value_stderr,
/// trials,metric_name`, one row per grid point plus the unregularized
/// reference), the raw per-trial CSV (`trial,grid_param,value`), and a JSON
/// mirror carrying the config echo, model hashes and excluded trials.
std::string sweep_summary_csv(const SweepResult& result);
std::string sweep_trials_csv(const SweepResult& result);
std::string sweep_json(const SweepConfig& cfg, const SweepResult& result);

/// FNV-1a 64-bit hash over the model's shape, discount, terminal set and
/// tensor bytes; stable across runs on the same platform.
std::uint64_t model_hash(const MdpModel& model);
std::string hash_hex(std::uint64_t hash);

}  // namespace mdpreg
