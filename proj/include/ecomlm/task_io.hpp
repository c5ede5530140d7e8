#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ecomlm/taskgen.hpp"

namespace ecomlm::taskgen {

nlohmann::json instance_to_json(const TaskInstance& inst);
TaskInstance instance_from_json(const nlohmann::json& j);

// Line-delimited JSON. When `run_config` is non-null a single header line
// (`"type": "run_config"`) carrying the resolved configuration is written
// first; instance lines follow, one per line, each with `"schema": 1`.
void write_task_file(const std::string& path, const std::vector<TaskInstance>& instances,
                     const nlohmann::json* run_config = nullptr);

struct TaskFile {
    std::vector<TaskInstance> instances;
    nlohmann::json run_config; // null when the file has no header line
};

TaskFile read_task_file(const std::string& path);

} // namespace ecomlm::taskgen
