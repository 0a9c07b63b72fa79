#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ems/simulate.hpp"

namespace ems {

struct Scenario {
    std::string name;
    Compensator compensator;
    RoadProfile road;
};

struct ScenarioOutcome {
    std::string name;
    std::optional<SimTrace> trace;  // empty when the run failed
    std::string error;
};

/// Seed of scenario `index` under `master`; independent of run order.
std::uint64_t derive_seed(std::uint64_t master, std::size_t index);

/// Serial reference runner. Scenario i uses derive_seed(cfg.seed, i).
std::vector<ScenarioOutcome> run_scenarios_serial(const StateSpace& plant,
                                                  const std::vector<Scenario>& scenarios,
                                                  const std::optional<NoiseModel>& nm,
                                                  const SimConfig& cfg);

/// OpenMP runner; outcomes are identical to run_scenarios_serial.
std::vector<ScenarioOutcome> run_scenarios_parallel(const StateSpace& plant,
                                                    const std::vector<Scenario>& scenarios,
                                                    const std::optional<NoiseModel>& nm,
                                                    const SimConfig& cfg);

} // namespace ems
