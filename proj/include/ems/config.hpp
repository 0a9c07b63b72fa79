#pragma once

#include <filesystem>
#include <string>

#include "ems/plant.hpp"
#include "ems/simulate.hpp"
#include "ems/synthesis.hpp"

namespace ems {

/// Everything a run needs. Defaults are the reference vehicle, the LQG
/// weights Q = 5 I3, R = 10, Xi = 5e-4, Theta = 1e-7 and the LQI weights
/// Q = 5 I4, R = 10, N = [0; 1; 1; 1].
struct RunConfig {
    PlantParams plant;
    Realization realization = Realization::companion;
    LqWeights lqg;
    NoiseModel noise;
    LqWeights lqi;
    RoadProfile road;
    SimConfig sim;
    std::string out_dir = "out";

    RunConfig();

    /// Throws ConfigError naming the failed constraint.
    void validate() const;
};

bool operator==(const RunConfig& a, const RunConfig& b);

/// Parses either the dotted key-value format
///
///     # comment
///     plant.m = 2
///     lqg.Q = [[5,0,0],[0,5,0],[0,0,5]]
///     road.shape = half_sine_bump
///
/// or, when the document starts with '{', an equivalent nested JSON object.
/// Omitted keys keep their defaults; unknown keys are rejected.
RunConfig parse_config(const std::string& text);

RunConfig load_config(const std::filesystem::path& path);

/// Key-value rendering accepted by parse_config.
std::string render_config(const RunConfig& cfg);

} // namespace ems
