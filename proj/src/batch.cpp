#include "ems/batch.hpp"

#include <exception>

#include "ems/errors.hpp"

namespace ems {

namespace {

ScenarioOutcome run_one(const StateSpace& plant, const Scenario& s,
                        const std::optional<NoiseModel>& nm, const SimConfig& cfg,
                        std::size_t index) {
    SimConfig local = cfg;
    local.seed = derive_seed(cfg.seed, index);
    ScenarioOutcome out;
    out.name = s.name;
    try {
        out.trace = simulate_closed_loop(plant, s.compensator, s.road, nm, local);
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    return out;
}

} // namespace

std::uint64_t derive_seed(std::uint64_t master, std::size_t index) {
    // splitmix64 finalizer over (master, index)
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(index) + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::vector<ScenarioOutcome> run_scenarios_serial(const StateSpace& plant,
                                                  const std::vector<Scenario>& scenarios,
                                                  const std::optional<NoiseModel>& nm,
                                                  const SimConfig& cfg) {
    std::vector<ScenarioOutcome> out;
    out.reserve(scenarios.size());
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        out.push_back(run_one(plant, scenarios[i], nm, cfg, i));
    }
    return out;
}

std::vector<ScenarioOutcome> run_scenarios_parallel(const StateSpace& plant,
                                                    const std::vector<Scenario>& scenarios,
                                                    const std::optional<NoiseModel>& nm,
                                                    const SimConfig& cfg) {
    std::vector<ScenarioOutcome> out(scenarios.size());
    const auto count = static_cast<std::ptrdiff_t>(scenarios.size());
    // Each iteration writes only its own slot; run_one never lets an
    // exception escape the parallel region.
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        out[idx] = run_one(plant, scenarios[idx], nm, cfg, idx);
    }
    return out;
}

} // namespace ems
