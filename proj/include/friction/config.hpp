#ifndef FRICTION_CONFIG_HPP
#define FRICTION_CONFIG_HPP

#include <string>
#include <vector>

#include "friction/types.hpp"

namespace friction {

struct LoadedConfig {
    RunConfig config;
    std::string bytes;  // raw file contents, hashed into the run id
};

/// Reads and validates a JSON run configuration. The file maps 1:1 to
/// RunConfig; unknown keys are rejected. Secrets come from the environment
/// (FRICTION_API_KEY or a per-model api_key_env), never from the file.
LoadedConfig load_config(const std::string& path);

ModelHandle load_model_handle(const std::string& path);

struct ResolvedDataset {
    std::vector<Problem> problems;  // full set, before subsampling
    std::string bytes;              // exact bytes hashed into the run id
};

/// Loads the task's dataset file, or generates the synthetic one the config
/// asks for.
ResolvedDataset resolve_dataset(const RunConfig& cfg);

std::string hash_hex(const std::string& bytes);

/// run_id = hash of (config bytes, dataset bytes): a drifted config or
/// dataset can never silently reuse an existing store.
std::string run_id_for(const std::string& config_bytes, const std::string& dataset_bytes);

std::string problems_to_jsonl(const std::vector<Problem>& problems);

}  // namespace friction

#endif
