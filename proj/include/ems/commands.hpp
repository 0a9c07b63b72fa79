#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "ems/batch.hpp"
#include "ems/config.hpp"

namespace ems {

inline constexpr const char* kToolkitVersion = "1.0.0";

/// Process exit codes shared by every subcommand.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 1,
    kExitSynthesis = 2,
    kExitSimulation = 3,
};

/// Published numbers the reports compare against.
namespace published {
inline constexpr std::array<double, 4> kDenominator{1.0, 50.0, 0.1375, 6.874};
inline constexpr double kNumerator = 1.0;
inline constexpr std::array<double, 4> kLqiGain{0.2004, 9.8905, 1.0844, -0.7071};
inline constexpr double kRoadAmplitude = 0.1;
inline constexpr double kPeakLqg = 0.01;
inline constexpr double kPeakLqi = 0.05;
// Printed 4th-order LQG compensator; documentation only.
inline constexpr std::array<double, 4> kCompensatorNum{0.5678, 2.8754, 1.4322, 2.0123};
inline constexpr std::array<double, 5> kCompensatorDen{1.0, 12.0, 35.0, 94.0, 112.0};
} // namespace published

struct LqgDesign {
    StateSpace plant;
    LqrSolution regulator;
    KalmanSolution estimator;
    DynamicCompensator compensator;
    Matrix closed_loop;
    Spectrum spectrum;
};

struct LqiDesign {
    StateSpace plant;
    AugmentedPlant augmented;
    LqrSolution solution;
    IntegralStateFeedback compensator;
    Matrix closed_loop;
    Spectrum spectrum;
};

LqgDesign design_lqg(const RunConfig& cfg);
LqiDesign design_lqi(const RunConfig& cfg);

nlohmann::ordered_json matrix_json(const Matrix& m);
nlohmann::ordered_json spectrum_json(const Spectrum& s);
nlohmann::ordered_json comparison_json(const std::string& quantity, double paper_value,
                                       double computed_value);

nlohmann::ordered_json model_report(const RunConfig& cfg);
std::string model_text(const RunConfig& cfg);

nlohmann::ordered_json lqg_artifact(const LqgDesign& d);
nlohmann::ordered_json lqi_artifact(const LqiDesign& d);

struct CompareResult {
    nlohmann::ordered_json report;
    std::vector<ScenarioOutcome> outcomes;
    int exit_code = kExitOk;
};

/// Open loop, LQG and LQI on the same road and master seed. Writes
/// <name>.csv per successful scenario and report.json into out_dir.
CompareResult run_compare(const RunConfig& cfg, const std::filesystem::path& out_dir);

/// Builds the compare scenarios without running them.
std::vector<Scenario> compare_scenarios(const RunConfig& cfg, const LqgDesign& lqg,
                                        const LqiDesign& lqi);

} // namespace ems
