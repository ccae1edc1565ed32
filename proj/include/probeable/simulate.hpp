#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "probeable/attempt_log.hpp"

namespace probeable {

struct CategoryBehaviour {
    std::size_t students = 0;
    double mean_probes_before_code = 0;  // geometric-like, clamped
    double fail_probability = 0;         // per code submission
    double mean_probes_after_fail = 0;
    double default_probe_probability = 0.8;
};

struct SimulationConfig {
    // Indexed A, B, C, D.
    std::array<CategoryBehaviour, 4> categories{};
    std::vector<std::string> problems{"P7", "P8", "P9"};
    std::uint64_t seed = 1;
    std::size_t max_submissions = 30;
    std::size_t max_probes = 200;

    void validate() const;  // ConfigError
    static SimulationConfig defaults();
};

SimulationConfig simulation_config_from_json(const nlohmann::json &j);

struct SimulationOutput {
    std::string log;  // newline-delimited JSON records, replayable by AttemptStore
    Roster roster;
};

// Same config and seed -> byte-identical output.
SimulationOutput simulate(const SimulationConfig &config);

}  // namespace probeable
