#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ems/config.hpp"

namespace ems {

struct CriterionResult {
    std::string id;
    std::string title;
    bool passed = false;
    /// Reported only; never affects the verdict.
    bool informational = false;
    std::string detail;
};

struct ValidateOptions {
    /// Added to every Riccati solution before the A2 residual check.
    /// Nonzero values are a negative control.
    double care_residual_injection = 0.0;
    /// Scratch space for the determinism runs; a temp dir when empty.
    std::filesystem::path scratch_dir;
};

/// Runs every acceptance criterion against `cfg`.
std::vector<CriterionResult> run_acceptance(const RunConfig& cfg, const ValidateOptions& opts = {});

/// One line per criterion; returns true when every non-informational
/// criterion passed.
bool print_acceptance(const std::vector<CriterionResult>& results, std::ostream& os);

// Individual criteria, exposed for focused tests.
CriterionResult check_transfer_function(const RunConfig& cfg);
CriterionResult check_care_quality(const RunConfig& cfg, double injection);
CriterionResult check_separation(const RunConfig& cfg);
CriterionResult check_optimality(const RunConfig& cfg);
std::vector<CriterionResult> check_lqi(const RunConfig& cfg);
CriterionResult check_peak_ordering(const RunConfig& cfg);
CriterionResult check_linearization(const RunConfig& cfg);
CriterionResult check_rk4_order();
CriterionResult check_determinism(const RunConfig& cfg, const std::filesystem::path& scratch);

/// log2(e(dt) / e(dt/2)) of RK4 on x' = -x, x(0) = 1, to t = 1.
double measured_rk4_order(double dt);

} // namespace ems
