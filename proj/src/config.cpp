#include "friction/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "friction/errors.hpp"
#include "friction/rng.hpp"
#include "friction/synthetic_arith.hpp"
#include "friction/tasks.hpp"

namespace friction {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

const std::set<std::string> kConfigKeys = {
    "solver_model",       "feedback_model", "judge_model",
    "feedback_mechanism", "max_iterations", "sampling_strategy",
    "rejection_candidates", "seed",          "subsample_fraction",
    "concurrency_limit",  "task",           "fewshot_k",
    "fewshot_every_iteration",
};

}  // namespace

LoadedConfig load_config(const std::string& path) {
    LoadedConfig out;
    out.bytes = read_file(path);
    json j;
    try {
        j = json::parse(out.bytes);
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError(path + ": config must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (!kConfigKeys.count(key)) throw ConfigError(path + ": unknown key '" + key + "'");
    try {
        out.config = j.get<RunConfig>();
        validate_run_config(out.config);
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    } catch (const ValidationError& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return out;
}

ModelHandle load_model_handle(const std::string& path) {
    std::string bytes = read_file(path);
    try {
        return json::parse(bytes).get<ModelHandle>();
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

ResolvedDataset resolve_dataset(const RunConfig& cfg) {
    ResolvedDataset out;
    if (cfg.task.generator) {
        const ArithGenSpec& gen = *cfg.task.generator;
        std::string expected = mult_task_name(gen.digits, gen.base);
        if (cfg.task.name != expected)
            throw ConfigError("task name '" + cfg.task.name + "' does not match generator task '" +
                              expected + "'");
        out.problems = gen_mult_dataset(gen, cfg.seed);
        out.bytes = problems_to_jsonl(out.problems);
    } else {
        try {
            out.bytes = read_file(cfg.task.dataset_path);
            out.problems = parse_dataset(out.bytes, cfg.task.name);
        } catch (const DatasetError& e) {
            throw ConfigError(std::string("dataset: ") + e.what());
        }
    }
    return out;
}

std::string hash_hex(const std::string& bytes) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

std::string run_id_for(const std::string& config_bytes, const std::string& dataset_bytes) {
    std::string combined = config_bytes;
    combined.push_back('\0');
    combined += dataset_bytes;
    return hash_hex(combined);
}

std::string problems_to_jsonl(const std::vector<Problem>& problems) {
    std::string out;
    for (const auto& p : problems) {
        out += json(p).dump();
        out += '\n';
    }
    return out;
}

}  // namespace friction
