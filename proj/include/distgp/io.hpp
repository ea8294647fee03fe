#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>
#include <variant>

#include "distgp/geometry.hpp"
#include "distgp/regression.hpp"

namespace distgp {

// ---- Environment file (JSON) ----
// { "robot": { "dof", "link_lengths", "link_width", "joint_limits" },
//   "obstacles": [ { "vertices": [[x, y], ...] } ] }
nlohmann::json environment_to_json(const Environment& env);
Environment environment_from_json(const nlohmann::json& j);
void save_environment(const Environment& env, const std::string& path);
Environment load_environment(const std::string& path);

// ---- Model file (JSON) ----
// Self-describing container for either a GP or a KR model; loading a GP model
// refactorizes with the stored jitter so predictions round-trip bit-for-bit.
using AnyModel = std::variant<GpModel, KrModel>;
void save_model(const GpModel& model, const std::string& path);
void save_model(const KrModel& model, const std::string& path);
AnyModel load_model(const std::string& path);

// ---- Trajectory file (text tabular, T rows x D angle columns) ----
void save_trajectory(const Eigen::MatrixXd& waypoints, const std::string& path);
Eigen::MatrixXd load_trajectory(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

} // namespace distgp
